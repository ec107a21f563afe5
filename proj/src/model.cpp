#include "reuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "reuse/error.hpp"

namespace reuse::model {

LinkSpec LinkSpec::make(HermiteSeries series, bool with_reduction, int i_max) {
    LinkSpec link;
    link.info_exponent = exponents::information_exponent(series);
    link.degree = series.degree();
    if (with_reduction) {
        i_max = std::min(i_max, exponents::max_power_within_cap(series));
        link.reduction = exponents::monomial_reduction(series, exponents::ReductionMode::GeneralMin, i_max);
    }
    link.series = std::move(series);
    return link;
}

Vector make_direction(int d, DirectionMode mode, std::uint64_t seed) {
    if (d < 2) throw Error(ErrorKind::Domain, "dimension must be >= 2");
    Vector theta = Vector::Zero(d);
    if (mode == DirectionMode::Axis) {
        theta[0] = 1.0;
        return theta;
    }
    Stream s(seed, StreamPurpose::Direction);
    for (int i = 0; i < d; ++i) theta[i] = s.normal();
    return theta / theta.norm();
}

Batch sample_batch(const LinkSpec& link, const Vector& theta, int n, const DataConfig& cfg, std::uint64_t first_row,
                   StreamPurpose purpose, std::uint64_t sub) {
    const int d = cfg.d;
    if (theta.size() != d) throw Error(ErrorKind::Domain, "direction dimension does not match the data config");
    Batch out{Matrix(n, d), Vector(n)};
    // d input coordinates plus one noise draw per row.
    const std::uint64_t blocks_per_row = Stream::blocks_for_normals(static_cast<std::uint64_t>(d) + 1);
    std::vector<double> buf(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i < n; ++i) {
        Stream s(cfg.seed, purpose, sub, (first_row + i) * blocks_per_row);
        s.fill_normal(buf);
        for (int k = 0; k < d; ++k) out.x(i, k) = buf[k];
        const double index = out.x.row(i).dot(theta);
        out.y[i] = link.eval(index) + cfg.noise_std * buf[d];
    }
    return out;
}

Batch DataSource::next(int n) {
    Batch b = sample_batch(link_, theta_, n, cfg_, consumed_, purpose_, sub_);
    consumed_ += static_cast<std::uint64_t>(n);
    return b;
}

void write_batch_csv(std::ostream& os, const Batch& batch) {
    const auto d = batch.x.cols();
    for (Eigen::Index k = 0; k < d; ++k) os << "x_" << k << ',';
    os << "y\n";
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < batch.x.rows(); ++i) {
        for (Eigen::Index k = 0; k < d; ++k) os << batch.x(i, k) << ',';
        os << batch.y[i] << '\n';
    }
}

Batch read_batch_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Io, "empty batch CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "y") throw Error(ErrorKind::Io, "batch CSV header must end with 'y'");
    const std::size_t d = header.size() - 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (header[k] != "x_" + std::to_string(k)) throw Error(ErrorKind::Io, "unexpected batch CSV column '" + header[k] + "'");
    }
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != d + 1) throw Error(ErrorKind::Io, "batch CSV row " + std::to_string(rows + 1) + " has wrong width");
        ++rows;
    }
    Batch b{Matrix(rows, d), Vector(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < d; ++k) b.x(i, k) = values[i * (d + 1) + k];
        b.y[i] = values[i * (d + 1) + d];
    }
    return b;
}

DirectionMode parse_direction_mode(const std::string& s) {
    if (s == "axis") return DirectionMode::Axis;
    if (s == "random") return DirectionMode::Random;
    throw Error(ErrorKind::Config, "unknown direction mode '" + s + "'");
}

}  // namespace reuse::model
