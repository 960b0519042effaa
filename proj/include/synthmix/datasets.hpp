#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "synthmix/config.hpp"
#include "synthmix/simulate.hpp"

namespace synthmix {

struct TabularDataset {
    Eigen::MatrixXd features;      // p x k, columns are samples, standardized
    Eigen::VectorXd labels;        // k, entries in {-1,+1}
    Eigen::VectorXd feature_means;
    Eigen::VectorXd feature_scales;  // constant features get scale 1
    std::string neg_label, pos_label;  // raw values mapped to -1 / +1
};

// Rectangular numeric CSV with a header row; the label column must hold
// exactly two distinct values, mapped to {-1,+1} by lexicographic order
// unless pos_label_override names the +1 value.
TabularDataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& pos_label_override = "");

// || (1/k) sum y_i x_i ||, the empirical class-mean estimator.
double estimate_mu_norm(const TabularDataset& data);

struct MixingRecord {
    double proportion = 0.0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
};

// Per trial: seeded train/test split, generator fit on the real training
// subset, synthetic generation + pruning, ridge on the mixture, accuracy on
// the held-out rows. Standardization statistics come from the training split
// only.
std::vector<MixingRecord> real_data_mixing_run(
    const TabularDataset& data, const ExperimentConfig& cfg,
    const std::vector<double>& proportion_grid, std::uint64_t trials,
    double test_fraction = 0.2);

} // namespace synthmix
