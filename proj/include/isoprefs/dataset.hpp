#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isoprefs/matrix.hpp"

namespace isoprefs {

// Point cloud plus ground truth. `structure` holds the generating structure
// index for genuine points and -1 for anomalies; it may be empty when the
// source had no structure column.
struct LabeledDataset {
    Matrix points;                  // n x d
    std::vector<int> labels;        // 0 genuine, 1 anomaly
    std::vector<int> structure;     // empty or n entries
    double noise_sigma = 0.0;       // generator ground truth, 0 when unknown

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

// CSV layout: header `x1,...,xd,label[,structure]`, label in {0,1}.
LabeledDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const LabeledDataset& data);

// Scores CSV: header `index,score`, one row per point, 9 significant digits.
void write_scores_csv(const std::string& path, const std::vector<double>& scores);
std::vector<double> read_scores_csv(const std::string& path);

// Same digit budget as the score files; shared by every CSV writer.
std::string format_g9(double v);

} // namespace isoprefs
