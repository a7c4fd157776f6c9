#include "isoprefs/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "isoprefs/common.hpp"

namespace isoprefs {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& path, std::size_t lineno) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw IoError(path + ":" + std::to_string(lineno) + ": bad integer '" + s + "'");
    return v;
}

} // namespace

LabeledDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    auto header = split_line(line);

    std::size_t d = 0;
    while (d < header.size() && header[d] == "x" + std::to_string(d + 1)) ++d;
    bool has_structure = false;
    if (d == 0 || d >= header.size() || header[d] != "label")
        throw IoError(path + ": expected header x1,...,xd,label[,structure]");
    if (header.size() == d + 2 && header[d + 1] == "structure")
        has_structure = true;
    else if (header.size() != d + 1)
        throw IoError(path + ": unexpected trailing header columns");

    std::vector<double> coords;
    std::vector<int> labels;
    std::vector<int> structure;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        for (std::size_t i = 0; i < d; ++i)
            coords.push_back(parse_double(fields[i], path, lineno));
        long label = parse_long(fields[d], path, lineno);
        if (label != 0 && label != 1)
            throw IoError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
        labels.push_back(static_cast<int>(label));
        if (has_structure)
            structure.push_back(static_cast<int>(parse_long(fields[d + 1], path, lineno)));
    }

    LabeledDataset data;
    data.points = Matrix(labels.size(), d);
    std::copy(coords.begin(), coords.end(), data.points.data().begin());
    data.labels = std::move(labels);
    data.structure = std::move(structure);
    return data;
}

void write_dataset_csv(const std::string& path, const LabeledDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const std::size_t d = data.dim();
    for (std::size_t i = 0; i < d; ++i) out << "x" << (i + 1) << ",";
    out << "label";
    const bool has_structure = !data.structure.empty();
    if (has_structure) out << ",structure";
    out << "\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto row = data.points.row(r);
        for (std::size_t i = 0; i < d; ++i) out << format_g9(row[i]) << ",";
        out << data.labels[r];
        if (has_structure) out << "," << data.structure[r];
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_scores_csv(const std::string& path, const std::vector<double>& scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "index,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        out << i << "," << format_g9(scores[i]) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

std::vector<double> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || split_line(line).size() < 2)
        throw IoError(path + ": expected scores CSV header");
    std::vector<double> scores;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() < 2)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected index,score");
        long idx = parse_long(fields[0], path, lineno);
        if (idx != static_cast<long>(scores.size()))
            throw IoError(path + ":" + std::to_string(lineno) + ": indices must be 0..n-1 in order");
        scores.push_back(parse_double(fields[1], path, lineno));
    }
    return scores;
}

} // namespace isoprefs
