#include "cafd/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

#include "cafd/errors.hpp"

namespace cafd {

namespace {

namespace fs = std::filesystem;

bool has_extension(const fs::path& path, std::string_view ext) {
    auto e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

std::string describe(const fs::path& path) { return "'" + path.string() + "'"; }

std::vector<char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + describe(path) + " for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t load_u32_le(const char* p) {
    const auto* b = reinterpret_cast<const unsigned char*>(p);
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

void store_u32_le(std::uint32_t v, char* p) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
}

float load_f32_le(const char* p) { return std::bit_cast<float>(load_u32_le(p)); }

void store_f32_le(float v, char* p) { store_u32_le(std::bit_cast<std::uint32_t>(v), p); }

Eigen::MatrixXd read_fvec(const fs::path& path) {
    const auto bytes = slurp(path);
    if (bytes.size() < kFvecMagic.size() ||
        !std::equal(kFvecMagic.begin(), kFvecMagic.end(), bytes.begin())) {
        throw FormatError(describe(path) + ": missing FVEC1 magic");
    }
    if (bytes.size() < kFvecHeaderBytes) {
        throw TruncationError(describe(path) + ": header truncated (" +
                              std::to_string(bytes.size()) + " bytes)");
    }
    const std::uint64_t rows = load_u32_le(bytes.data() + 8);
    const std::uint64_t cols = load_u32_le(bytes.data() + 12);
    const std::uint64_t expected = rows * cols;
    const std::uint64_t payload = bytes.size() - kFvecHeaderBytes;
    if (payload % 4 != 0 || payload / 4 != expected) {
        throw TruncationError(describe(path) + ": header declares " + shape_string(rows, cols) +
                              " = " + std::to_string(expected) + " values but payload holds " +
                              std::to_string(payload / 4) +
                              (payload % 4 ? " values and a partial value" : " values"));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const char* p = bytes.data() + kFvecHeaderBytes;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j, p += 4) {
            m(i, j) = static_cast<double>(load_f32_le(p));
        }
    }
    return m;
}

void write_fvec(const Eigen::MatrixXd& m, const fs::path& path) {
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (static_cast<std::uint64_t>(m.rows()) > kMax || static_cast<std::uint64_t>(m.cols()) > kMax) {
        throw ValidationError("matrix too large for FVEC: " + shape_string(m.rows(), m.cols()));
    }
    std::vector<char> bytes(kFvecHeaderBytes + 4 * static_cast<std::size_t>(m.size()));
    std::copy(kFvecMagic.begin(), kFvecMagic.end(), bytes.begin());
    store_u32_le(static_cast<std::uint32_t>(m.rows()), bytes.data() + 8);
    store_u32_le(static_cast<std::uint32_t>(m.cols()), bytes.data() + 12);
    char* p = bytes.data() + kFvecHeaderBytes;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j, p += 4) {
            store_f32_le(static_cast<float>(m(i, j)), p);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + describe(path) + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + describe(path));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, const fs::path& path, std::size_t line) {
    field = trim(field);
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
        field = trim(field.substr(1, field.size() - 2));
    }
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw FormatError(describe(path) + " line " + std::to_string(line) + ": cannot parse '" +
                          std::string(field) + "' as a real number");
    }
    return v;
}

Eigen::MatrixXd read_csv(const fs::path& path) {
    const auto bytes = slurp(path);
    std::string_view text(bytes.data(), bytes.size());
    std::vector<double> flat;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        std::size_t fields = 0;
        while (true) {
            const auto comma = line.find(',');
            flat.push_back(parse_real(line.substr(0, comma), path, line_no));
            ++fields;
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw FormatError(describe(path) + " line " + std::to_string(line_no) + ": expected " +
                              std::to_string(cols) + " fields, found " + std::to_string(fields));
        }
        ++rows;
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * cols + j];
        }
    }
    return m;
}

std::string format_real(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + describe(path) + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + describe(path));
}

void write_csv(const Eigen::MatrixXd& m, const fs::path& path) {
    std::string text;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) text += ',';
            text += format_real(m(i, j));
        }
        text += '\n';
    }
    write_text(text, path);
}

std::size_t to_label(double v, const fs::path& path, std::size_t row) {
    if (!std::isfinite(v) || v < 0 || v != std::floor(v)) {
        throw DataError(describe(path) + " row " + std::to_string(row) + ": label " +
                        format_real(v) + " is not a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> read_label_text(const fs::path& path) {
    const auto bytes = slurp(path);
    std::string_view text(bytes.data(), bytes.size());
    std::vector<std::size_t> labels;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '-') {
            throw DataError(describe(path) + " line " + std::to_string(line_no) +
                            ": negative label '" + std::string(line) + "'");
        }
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size()) {
            throw FormatError(describe(path) + " line " + std::to_string(line_no) +
                              ": cannot parse '" + std::string(line) + "' as an integer label");
        }
        labels.push_back(v);
    }
    return labels;
}

}  // namespace

std::string shape_string(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            if (!std::isfinite(values_(i, j))) {
                throw DataError("non-finite feature value " + format_real(values_(i, j)) +
                                " at row " + std::to_string(i) + ", column " + std::to_string(j));
            }
        }
    }
}

namespace {

Eigen::MatrixXd matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw DimensionError("ragged rows: row 0 has " + std::to_string(cols) +
                                 " entries, row " + std::to_string(i) + " has " +
                                 std::to_string(rows[i].size()));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> indices) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), m.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= static_cast<std::size_t>(m.rows())) {
            throw ValidationError("row index " + std::to_string(indices[r]) + " out of range for " +
                                  std::to_string(m.rows()) + " rows");
        }
        out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(indices[r]));
    }
    return out;
}

}  // namespace

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    return FeatureMatrix(matrix_from_rows(rows));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix out;
    out.values_ = gather_rows(values_, indices);
    return out;
}

// ---------------------------------------------------------------------------
// LabelVector

LabelVector::LabelVector(std::vector<std::size_t> labels, std::size_t n_classes)
    : labels_(std::move(labels)), n_classes_(n_classes) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= n_classes_) {
            throw DataError("label " + std::to_string(labels_[i]) + " at row " + std::to_string(i) +
                            " is out of range for " + std::to_string(n_classes_) + " classes");
        }
    }
}

LabelVector LabelVector::select(std::span<const std::size_t> indices) const {
    std::vector<std::size_t> out;
    out.reserve(indices.size());
    for (auto i : indices) {
        if (i >= labels_.size()) {
            throw ValidationError("label index " + std::to_string(i) + " out of range");
        }
        out.push_back(labels_[i]);
    }
    return LabelVector(std::move(out), n_classes_);
}

// ---------------------------------------------------------------------------
// ProbabilityMatrix

ProbabilityMatrix::ProbabilityMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double v = values_(i, j);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowSumTolerance) {
                throw DataError("probability " + format_real(v) + " at row " + std::to_string(i) +
                                ", column " + std::to_string(j) + " is outside [0, 1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw DataError("probability row " + std::to_string(i) + " sums to " + format_real(sum) +
                            ", not 1 (simplex violation)");
        }
        values_.row(i) /= sum;
    }
}

ProbabilityMatrix ProbabilityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    return ProbabilityMatrix(matrix_from_rows(rows));
}

ProbabilityMatrix ProbabilityMatrix::select_rows(std::span<const std::size_t> indices) const {
    ProbabilityMatrix out;
    out.values_ = gather_rows(values_, indices);
    return out;
}

// ---------------------------------------------------------------------------
// LabelMarginal

LabelMarginal::LabelMarginal(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw ValidationError("label marginal needs at least one class");
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
        if (!std::isfinite(probs_(i)) || probs_(i) < 0.0) {
            throw DataError("marginal entry " + std::to_string(i) + " = " + format_real(probs_(i)) +
                            " is not a probability");
        }
    }
    if (std::abs(probs_.sum() - 1.0) > kSimplexTolerance) {
        throw DataError("label marginal sums to " + format_real(probs_.sum()) + ", not 1");
    }
}

LabelMarginal LabelMarginal::uniform(std::size_t k) {
    if (k == 0) throw ValidationError("label marginal needs at least one class");
    return LabelMarginal(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1.0 / double(k)));
}

LabelMarginal LabelMarginal::from_labels(const LabelVector& labels) {
    if (labels.size() == 0) throw ValidationError("cannot form a marginal from zero labels");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.n_classes()));
    for (auto l : labels.labels()) counts(static_cast<Eigen::Index>(l)) += 1.0;
    return LabelMarginal(counts / static_cast<double>(labels.size()));
}

LabelMarginal LabelMarginal::from_probabilities(const ProbabilityMatrix& p) {
    if (p.rows() == 0) throw ValidationError("cannot form a marginal from zero posterior rows");
    return LabelMarginal(p.values().colwise().mean().transpose());
}

// ---------------------------------------------------------------------------
// File I/O

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    return has_extension(path, ".csv") ? read_csv(path) : read_fvec(path);
}

void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    if (has_extension(path, ".csv")) {
        write_csv(m, path);
    } else {
        write_fvec(m, path);
    }
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
    auto m = read_matrix(path);
    try {
        return FeatureMatrix(std::move(m));
    } catch (const DataError& e) {
        throw DataError(describe(path) + ": " + e.what());
    }
}

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
    write_matrix(m.values(), path);
}

LabelVector read_labels(const std::filesystem::path& path, std::optional<std::size_t> n_classes) {
    std::vector<std::size_t> labels;
    if (has_extension(path, ".csv") || has_extension(path, ".fvec")) {
        const auto m = read_matrix(path);
        if (m.rows() > 0 && m.cols() != 1) {
            throw FormatError(describe(path) + ": label matrix must have one column, found " +
                              std::to_string(m.cols()));
        }
        labels.reserve(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            labels.push_back(to_label(m(i, 0), path, static_cast<std::size_t>(i)));
        }
    } else {
        labels = read_label_text(path);
    }
    const std::size_t k = n_classes.value_or(
        labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1);
    try {
        return LabelVector(std::move(labels), k);
    } catch (const DataError& e) {
        throw DataError(describe(path) + ": " + e.what());
    }
}

void write_labels(const LabelVector& labels, const std::filesystem::path& path) {
    if (has_extension(path, ".csv") || has_extension(path, ".fvec")) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(labels.size()), 1);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            m(static_cast<Eigen::Index>(i), 0) = static_cast<double>(labels[i]);
        }
        write_matrix(m, path);
        return;
    }
    std::string text;
    for (auto l : labels.labels()) {
        text += std::to_string(l);
        text += '\n';
    }
    write_text(text, path);
}

ProbabilityMatrix read_probabilities(const std::filesystem::path& path) {
    auto m = read_matrix(path);
    try {
        return ProbabilityMatrix(std::move(m));
    } catch (const DataError& e) {
        throw DataError(describe(path) + ": " + e.what());
    }
}

void write_probabilities(const ProbabilityMatrix& p, const std::filesystem::path& path) {
    write_matrix(p.values(), path);
}

ProbabilityMatrix one_hot(const LabelVector& labels, std::size_t k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= k) {
            throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                            " is out of range for " + std::to_string(k) + " classes");
        }
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }
    return ProbabilityMatrix(std::move(m));
}

void validate_pair(const FeatureMatrix& real, const FeatureMatrix& gen,
                   const ProbabilityMatrix& real_p, const ProbabilityMatrix& gen_p) {
    const auto shapes = [&] {
        return "real features " + shape_string(real.rows(), real.cols()) + ", generated features " +
               shape_string(gen.rows(), gen.cols()) + ", real posteriors " +
               shape_string(real_p.rows(), real_p.n_classes()) + ", generated posteriors " +
               shape_string(gen_p.rows(), gen_p.n_classes());
    };
    if (real.cols() != gen.cols()) {
        throw DimensionError("feature dimension mismatch: " + shapes());
    }
    if (real_p.n_classes() != gen_p.n_classes()) {
        throw DimensionError("class-count mismatch: " + shapes());
    }
    if (real.rows() != real_p.rows() || gen.rows() != gen_p.rows()) {
        throw DimensionError("sample-count mismatch between features and posteriors: " + shapes());
    }
}

}  // namespace cafd
