#include <vector>

#include "kernels_common.hpp"
#include "reuse/error.hpp"

namespace reuse::kernels {

LossMode parse_loss_mode(const std::string& s) {
    if (s == "squared") return LossMode::Squared;
    if (s == "correlation") return LossMode::Correlation;
    throw Error(ErrorKind::Config, "unknown loss '" + s + "'");
}

const char* to_string(LossMode m) { return m == LossMode::Squared ? "squared" : "correlation"; }

Backend parse_backend(const std::string& s) {
    if (s == "serial") return Backend::Serial;
    if (s == "openmp") return Backend::OpenMP;
    throw Error(ErrorKind::Config, "unknown backend '" + s + "'");
}

const char* to_string(Backend b) { return b == Backend::Serial ? "serial" : "openmp"; }

void sgd_step(network::NetworkState& state, const Matrix& X, const Vector& y, double raw_eta, LossMode loss,
              const Matrix& proj, Backend backend, Workspace& ws) {
    if (X.cols() != state.dim() || y.size() != X.rows() || proj.rows() != state.W.rows() ||
        proj.cols() != state.W.cols()) {
        throw Error(ErrorKind::Domain, "sgd_step: dimension mismatch");
    }
    if (X.rows() == 0 || raw_eta == 0.0) return;
    if (backend == Backend::Serial) {
        detail::sgd_step_serial(state, X, y, raw_eta, loss, proj, ws);
    } else {
        detail::sgd_step_omp(state, X, y, raw_eta, loss, proj, ws);
    }
}

namespace detail {

void sgd_step_serial(network::NetworkState& st, const Matrix& X, const Vector& y, double raw_eta, LossMode loss,
                     const Matrix& proj, Workspace& ws) {
    prepare(st, X, ws);
    const auto B = X.rows();
    const int N = st.width();
    const bool blocked = B >= kBlockedMinBatch;
    if (blocked) {
        for (int blk = 0; blk < block_count(N); ++blk) preactivation_block(st, X, ws, blk);
    } else {
        for (Eigen::Index i = 0; i < B; ++i) {
            for (int j = 0; j < N; ++j) preactivation(st, X, ws, i, j);
        }
    }
    for (Eigen::Index i = 0; i < B; ++i) output(st, y, loss, ws, i);
    for (Eigen::Index i = 0; i < B; ++i) {
        for (int j = 0; j < N; ++j) coefficient(st, ws, i, j);
    }
    const double scale = raw_eta * 2.0 / (static_cast<double>(N) * static_cast<double>(B));
    if (blocked) {
        Matrix g;
        for (int blk = 0; blk < block_count(N); ++blk) update_block(st, X, proj, scale, ws, blk, g);
    } else {
        std::vector<double> g(st.dim());
        for (int j = 0; j < N; ++j) update(st, X, proj, scale, ws, j, g.data());
    }
}

}  // namespace detail
}  // namespace reuse::kernels
