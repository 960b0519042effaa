#include "synthmix/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace synthmix {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace and stray CR
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& s, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        std::ostringstream os;
        os << "non-numeric feature cell '" << s << "' at row " << row
           << ", column " << col;
        throw ConfigError(os.str());
    }
    return v;
}

} // namespace

TabularDataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& pos_label_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV file: " + path);
    const std::vector<std::string> header = split_csv_line(line);

    // label column by name, or by 0-based index if the name is numeric
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size()) {
        try {
            std::size_t used = 0;
            const long idx = std::stol(label_column, &used);
            if (used == label_column.size() && idx >= 0 &&
                static_cast<std::size_t>(idx) < header.size())
                label_idx = static_cast<std::size_t>(idx);
        } catch (...) {
        }
    }
    if (label_idx == header.size())
        throw ConfigError("label column '" + label_column + "' not found");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << "ragged row " << row_no << ": expected " << header.size()
               << " cells, got " << cells.size();
            throw ConfigError(os.str());
        }
        std::vector<double> feat;
        feat.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.push_back(cells[c]);
            } else {
                feat.push_back(parse_number(cells[c], row_no, c));
            }
        }
        rows.push_back(std::move(feat));
    }
    if (rows.empty()) throw ConfigError("CSV has no data rows: " + path);

    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() != 2) {
        std::ostringstream os;
        os << "label column must hold exactly 2 distinct values, got "
           << distinct.size();
        throw ConfigError(os.str());
    }
    // lexicographic order: smaller value -> -1
    std::string neg = *distinct.begin(), pos = *std::next(distinct.begin());
    if (!pos_label_override.empty()) {
        if (pos_label_override == neg) std::swap(neg, pos);
        else if (pos_label_override != pos)
            throw ConfigError("positive-label override '" + pos_label_override +
                              "' does not match either label value");
    }

    TabularDataset ds;
    const auto p = static_cast<Eigen::Index>(rows[0].size());
    const auto k = static_cast<Eigen::Index>(rows.size());
    ds.features.resize(p, k);
    ds.labels.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) ds.features(j, i) = rows[i][j];
        ds.labels(i) = (raw_labels[i] == pos) ? 1.0 : -1.0;
    }
    ds.neg_label = neg;
    ds.pos_label = pos;

    ds.feature_means = ds.features.rowwise().mean();
    ds.features.colwise() -= ds.feature_means;
    ds.feature_scales.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double var = ds.features.row(j).squaredNorm() / static_cast<double>(k);
        const double sd = std::sqrt(var);
        ds.feature_scales(j) = (sd > 0.0) ? sd : 1.0;  // constant features keep scale 1
    }
    ds.features.array().colwise() /= ds.feature_scales.array();
    return ds;
}

double estimate_mu_norm(const TabularDataset& data) {
    const Eigen::Index k = data.labels.size();
    const bool has_pos = (data.labels.array() > 0).any();
    const bool has_neg = (data.labels.array() < 0).any();
    if (!has_pos || !has_neg)
        throw ConfigError("estimate_mu_norm: need at least one sample per class");
    Eigen::VectorXd mu_hat =
        (data.features * data.labels) / static_cast<double>(k);
    return mu_hat.norm();
}

std::vector<MixingRecord> real_data_mixing_run(
    const TabularDataset& data, const ExperimentConfig& cfg,
    const std::vector<double>& proportion_grid, std::uint64_t trials,
    double test_fraction) {
    cfg.validate();
    if (trials == 0) throw ConfigError("real_data_mixing_run: trials must be positive");
    for (double pr : proportion_grid)
        if (!(pr >= 0.0 && pr < 1.0))
            throw ConfigError("real_data_mixing_run: proportions must lie in [0,1)");

    const Eigen::Index k = data.labels.size();
    const Eigen::Index p = data.features.rows();
    const auto n_test = static_cast<Eigen::Index>(
        std::llround(test_fraction * static_cast<double>(k)));
    const auto n_train_avail = k - n_test;
    if (n_test < 1 || n_train_avail < static_cast<Eigen::Index>(cfg.n)) {
        std::ostringstream os;
        os << "insufficient rows: have " << k << ", need n = " << cfg.n
           << " training plus " << n_test << " test";
        throw ConfigError(os.str());
    }
    if (static_cast<Eigen::Index>(cfg.p) != p)
        throw ConfigError("real_data_mixing_run: config p does not match dataset");

    // raw values so each split can be standardized without leakage
    Eigen::MatrixXd raw = data.features.array().colwise() * data.feature_scales.array();
    raw.colwise() += data.feature_means;

    std::vector<double> acc_sum(proportion_grid.size(), 0.0);
    std::vector<double> acc_sumsq(proportion_grid.size(), 0.0);

    for (std::uint64_t t = 0; t < trials; ++t) {
        // seeded uniform permutation -> disjoint train/test split
        std::vector<Eigen::Index> perm(k);
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        Rng rsplit = Rng::substream(cfg.seed, "split", t);
        for (Eigen::Index i = k - 1; i > 0; --i) {
            const auto j = static_cast<Eigen::Index>(
                rsplit.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }

        const auto n = static_cast<Eigen::Index>(cfg.n);
        LabeledMatrix real;
        real.features.resize(p, n);
        real.labels.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            real.features.col(i) = raw.col(perm[i]);
            real.labels(i) = data.labels(perm[i]);
        }
        Eigen::MatrixXd test_x(p, n_test);
        Eigen::VectorXd test_y(n_test);
        for (Eigen::Index i = 0; i < n_test; ++i) {
            test_x.col(i) = raw.col(perm[n_train_avail + i]);
            test_y(i) = data.labels(perm[n_train_avail + i]);
        }

        // standardization statistics from the training split only
        Eigen::VectorXd means = real.features.rowwise().mean();
        real.features.colwise() -= means;
        Eigen::VectorXd scales(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double sd = std::sqrt(real.features.row(j).squaredNorm() /
                                        static_cast<double>(n));
            scales(j) = (sd > 0.0) ? sd : 1.0;
        }
        real.features.array().colwise() /= scales.array();
        test_x.colwise() -= means;
        test_x.array().colwise() /= scales.array();

        GeneratorModel gen = fit_generator(real);

        for (std::size_t gi = 0; gi < proportion_grid.size(); ++gi) {
            const double prop = proportion_grid[gi];
            const auto m = static_cast<std::uint64_t>(
                std::llround(prop / (1.0 - prop) * static_cast<double>(cfg.n)));
            LabeledMatrix synth;
            synth.features.resize(p, 0);
            synth.labels.resize(0);
            if (m > 0) {
                Rng rs = Rng::substream(cfg.seed, "mix-synthetic", t * 1000003 + gi);
                synth = sample_synthetic(m, gen, cfg.epsilon, rs);
                Rng rp = Rng::substream(cfg.seed, "mix-prune", t * 1000003 + gi);
                synth = prune(synth, cfg.rho, cfg.phi, rp);
            }
            RidgeModel model = train_ridge(real, synth, cfg.gamma);

            Eigen::VectorXd scores = model.weights.transpose() * test_x;
            std::uint64_t correct = 0;
            for (Eigen::Index i = 0; i < n_test; ++i) {
                const double pred = (scores(i) >= 0.0) ? 1.0 : -1.0;
                if (pred == test_y(i)) ++correct;
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(n_test);
            acc_sum[gi] += acc;
            acc_sumsq[gi] += acc * acc;
        }
    }

    std::vector<MixingRecord> out;
    const double T = static_cast<double>(trials);
    for (std::size_t gi = 0; gi < proportion_grid.size(); ++gi) {
        MixingRecord rec;
        rec.proportion = proportion_grid[gi];
        rec.mean_acc = acc_sum[gi] / T;
        rec.std_acc = (trials > 1)
            ? std::sqrt(std::max(0.0, (acc_sumsq[gi] - T * rec.mean_acc * rec.mean_acc) / (T - 1.0)))
            : 0.0;
        out.push_back(rec);
    }
    return out;
}

} // namespace synthmix
