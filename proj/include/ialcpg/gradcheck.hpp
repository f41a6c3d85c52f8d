#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ialcpg/autograd.hpp"

namespace ialcpg::ag {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Entries skipped because the function has a kink within eps: the second
  // difference at eps and at eps/2 disagree, e.g. relu probed near 0.
  std::size_t excluded = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  bool passed = true;

  double max_rel_error() const;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double relative_error(double analytic, double numeric);

/// Compares backward() gradients of `fn` against central differences for
/// every entry of every tensor in `wrt`. `fn` must rebuild its graph on each
/// call and return a 1x1 tensor.
GradCheckReport grad_check(const std::function<Tensor()>& fn, const std::vector<NamedTensor>& wrt,
                           double eps = 1e-5, double tolerance = 1e-4);

}  // namespace ialcpg::ag
