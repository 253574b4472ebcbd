#pragma once

// Independent reference implementations used only by tests.

#include <Eigen/Dense>
#include <vector>

#include "botsort/metrics.hpp"

namespace botsort::testing {

/// Textbook Kalman filter on dense dynamic matrices, written from the model equations
/// with explicit F, H and an explicit inverse. Shares no code with the library filter.
struct DenseKalman {
  double sigma_p = 0.05;
  double sigma_v = 0.00625;
  double sigma_m = 0.05;
  double dt = 1.0;

  Eigen::MatrixXd F() const;
  Eigen::MatrixXd H() const;
  Eigen::MatrixXd Q(double w, double h) const;
  Eigen::MatrixXd R(double w, double h) const;

  void predict(Eigen::VectorXd& x, Eigen::MatrixXd& P) const;
  void update(Eigen::VectorXd& x, Eigen::MatrixXd& P, const Eigen::VectorXd& z) const;
};

/// Minimum total cost over every injective pairing of the smaller side, by enumeration.
/// Entries are summed in row order.
double brute_force_min_cost(const std::vector<double>& cost, std::size_t rows, std::size_t cols);

/// Total cost of an assignment summed in row order.
double assignment_cost(const std::vector<double>& cost, std::size_t cols, const std::vector<int>& row_to_col);

/// IDF1 by enumerating every partial one-to-one trajectory matching.
double brute_force_idf1(const Trajectories& gt, const Trajectories& pred, double iou_thresh);

}  // namespace botsort::testing
