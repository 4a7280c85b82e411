#pragma once

#include <cmath>
#include <vector>

#include "pmga/common.hpp"

namespace pmga {

struct Trajectory {
  std::vector<Vec> states;   // s_1 .. s_H (state before each action)
  std::vector<Vec> actions;  // a_1 .. a_H
  Mat rewards;               // H x q, row k holds r(s_k, a_k, s_{k+1})

  Index horizon() const { return static_cast<Index>(actions.size()); }

  /// Per-objective return sum_k gamma^{k-1} r_k.
  Vec discounted_return(double gamma) const {
    Vec out = Vec::Zero(rewards.cols());
    double g = 1.0;
    for (Index k = 0; k < rewards.rows(); ++k) {
      out += g * rewards.row(k).transpose();
      g *= gamma;
    }
    return out;
  }
};

}  // namespace pmga
