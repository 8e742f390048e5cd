#pragma once

#include <Eigen/Dense>
#include <vector>

namespace biip {

// Real-valued k-form: one value per oriented k-clique, in the complex's
// dictionary order.
struct KForm {
  int level = 0;
  Eigen::VectorXd values;
};

// Time series of k-forms on a fixed complex. snapshots[i] belongs to
// timestamps[i]; timestamps are strictly increasing.
struct Trajectory {
  int level = 0;
  std::vector<double> timestamps;
  std::vector<Eigen::VectorXd> snapshots;
};

}  // namespace biip
