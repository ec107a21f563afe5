#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "reuse/exponents.hpp"
#include "reuse/linalg.hpp"
#include "reuse/rng.hpp"

namespace reuse::model {

using hermite::HermiteSeries;

/// Target link sigma_* = sum_{i=p}^{q} alpha_i he_i.
struct LinkSpec {
    HermiteSeries series;
    int degree = 0;
    int info_exponent = 0;
    std::optional<exponents::ReductionCertificate> reduction;

    /// Validates the series, fills degree / information exponent and, when
    /// requested, the general_min reduction certificate (I, p*).
    static LinkSpec make(HermiteSeries series, bool with_reduction = true,
                         int i_max = exponents::kDefaultPowerCap);

    /// p* from the certificate (falls back to the information exponent).
    int p_star() const { return reduction ? reduction->achieved_ie : info_exponent; }
    int power() const { return reduction ? reduction->power : 1; }
    double eval(double z) const { return hermite::eval(series, z); }
};

struct DataConfig {
    int d = 2;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

enum class DirectionMode { Axis, Random };

Vector make_direction(int d, DirectionMode mode, std::uint64_t seed);

struct Batch {
    Matrix x;  // n x d
    Vector y;  // n
};

/// Rows first_row .. first_row + n - 1 of the infinite i.i.d. sample stream
/// defined by cfg.seed. Each row owns a disjoint Philox counter range, so the
/// result does not depend on how draws are chunked.
/// `purpose`/`sub` select an independent stream (training, ridge, test, ...).
Batch sample_batch(const LinkSpec& link, const Vector& theta, int n, const DataConfig& cfg,
                   std::uint64_t first_row = 0, StreamPurpose purpose = StreamPurpose::Data,
                   std::uint64_t sub = 0);

/// Stateful cursor over the sample stream; tracks how many rows were consumed.
class DataSource {
public:
    DataSource(LinkSpec link, Vector theta, DataConfig cfg,
               StreamPurpose purpose = StreamPurpose::Data, std::uint64_t sub = 0)
        : link_(std::move(link)), theta_(std::move(theta)), cfg_(cfg), purpose_(purpose), sub_(sub) {}

    Batch next(int n);
    std::uint64_t consumed() const { return consumed_; }
    void seek(std::uint64_t row) { consumed_ = row; }

    const LinkSpec& link() const { return link_; }
    const Vector& theta() const { return theta_; }
    const DataConfig& config() const { return cfg_; }

private:
    LinkSpec link_;
    Vector theta_;
    DataConfig cfg_;
    StreamPurpose purpose_;
    std::uint64_t sub_;
    std::uint64_t consumed_ = 0;
};

void write_batch_csv(std::ostream& os, const Batch& batch);
Batch read_batch_csv(std::istream& is);

DirectionMode parse_direction_mode(const std::string& s);

}  // namespace reuse::model
