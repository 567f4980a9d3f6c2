#include "lossrobust/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lossrobust/csv.hpp"

namespace lossrobust {

std::string split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    throw std::logic_error("split_name: bad tag");
}

Split split_from_name(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::runtime_error("split_from_name: unknown split '" + s + "'");
}

std::vector<std::size_t> LabeledDataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

std::size_t LabeledDataset::count(Split s) const {
    std::size_t n = 0;
    for (Split t : split)
        if (t == s) ++n;
    return n;
}

static Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(rows[i], j);
    return out;
}

Matrix LabeledDataset::x_rows(Split s) const { return gather_rows(X, indices(s)); }
Matrix LabeledDataset::y_rows(Split s) const { return gather_rows(Y, indices(s)); }

void LabeledDataset::validate() const {
    if (X.rows != Y.rows || X.rows != split.size())
        throw std::runtime_error("LabeledDataset: row count mismatch between X, Y and split tags");
    for (double v : X.data)
        if (!std::isfinite(v)) throw std::runtime_error("LabeledDataset: non-finite covariate");
    for (double v : Y.data)
        if (!std::isfinite(v)) throw std::runtime_error("LabeledDataset: non-finite target");
}

Standardizer fit_standardizer(const Matrix& m, const std::vector<std::size_t>& rows) {
    if (rows.empty()) throw std::runtime_error("fit_standardizer: no rows");
    Standardizer st;
    st.mean.assign(m.cols, 0.0);
    st.std.assign(m.cols, 0.0);
    for (std::size_t j = 0; j < m.cols; ++j) {
        double s = 0.0;
        for (std::size_t i : rows) s += m(i, j);
        st.mean[j] = s / static_cast<double>(rows.size());
        double v = 0.0;
        for (std::size_t i : rows) {
            double d = m(i, j) - st.mean[j];
            v += d * d;
        }
        st.std[j] = std::sqrt(v / static_cast<double>(rows.size()));
        if (st.std[j] <= 0.0)
            throw std::runtime_error("fit_standardizer: degenerate column with zero spread");
    }
    return st;
}

void save_dataset_csv(const LabeledDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
    for (std::size_t j = 0; j < ds.X.cols; ++j) out << 'x' << (j + 1) << ',';
    for (std::size_t j = 0; j < ds.Y.cols; ++j) out << 'y' << (j + 1) << ',';
    out << "split\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.X.cols; ++j) out << format_double(ds.X(i, j)) << ',';
        for (std::size_t j = 0; j < ds.Y.cols; ++j) out << format_double(ds.Y(i, j)) << ',';
        out << split_name(ds.split[i]) << '\n';
    }
}

LabeledDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_dataset_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_fields(line);
    std::size_t p = 0, m = 0;
    for (auto f : header) {
        if (!f.empty() && f.front() == 'x') ++p;
        else if (!f.empty() && f.front() == 'y') ++m;
    }
    if (p == 0 || m == 0 || header.size() != p + m + 1 || header.back() != "split")
        throw std::runtime_error("load_dataset_csv: malformed header in " + path);

    LabeledDataset ds;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != p + m + 1)
            throw std::runtime_error("load_dataset_csv: wrong field count in " + path);
        for (std::size_t j = 0; j < p; ++j) xs.push_back(parse_double(fields[j]));
        for (std::size_t j = 0; j < m; ++j) ys.push_back(parse_double(fields[p + j]));
        ds.split.push_back(split_from_name(std::string(fields[p + m])));
    }
    std::size_t n = ds.split.size();
    ds.X = Matrix(n, p);
    ds.X.data = std::move(xs);
    ds.Y = Matrix(n, m);
    ds.Y.data = std::move(ys);
    ds.validate();
    return ds;
}

} // namespace lossrobust
