#include <vector>

#include <omp.h>

#include "kernels_common.hpp"

namespace reuse::kernels::detail {

void sgd_step_omp(network::NetworkState& st, const Matrix& X, const Vector& y, double raw_eta, LossMode loss,
                  const Matrix& proj, Workspace& ws) {
    prepare(st, X, ws);
    const auto B = static_cast<long>(X.rows());
    const int N = st.width();
    const double scale = raw_eta * 2.0 / (static_cast<double>(N) * static_cast<double>(B));
    const bool blocked = B >= kBlockedMinBatch;
    const int blocks = block_count(N);
#pragma omp parallel
    {
        // Pre-activations are needed by every sample's output, so split over neurons.
        if (blocked) {
#pragma omp for schedule(static)
            for (int blk = 0; blk < blocks; ++blk) preactivation_block(st, X, ws, blk);
        } else {
#pragma omp for schedule(static)
            for (int j = 0; j < N; ++j) {
                for (long i = 0; i < B; ++i) preactivation(st, X, ws, i, j);
            }
        }
#pragma omp for schedule(static)
        for (long i = 0; i < B; ++i) {
            output(st, y, loss, ws, i);
            for (int j = 0; j < N; ++j) coefficient(st, ws, i, j);
        }
        if (blocked) {
            Matrix g;
#pragma omp for schedule(static)
            for (int blk = 0; blk < blocks; ++blk) update_block(st, X, proj, scale, ws, blk, g);
        } else {
            std::vector<double> g(st.dim());
#pragma omp for schedule(static)
            for (int j = 0; j < N; ++j) update(st, X, proj, scale, ws, j, g.data());
        }
    }
}

}  // namespace reuse::kernels::detail
