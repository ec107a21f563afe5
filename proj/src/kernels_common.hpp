#pragma once

// Per-entry arithmetic shared by the serial and OpenMP step kernels.

#include <algorithm>

#include "reuse/kernels.hpp"

namespace reuse::kernels::detail {

// Four interleaved partial sums; the order is fixed so every caller gets the same bits.
inline double dot(const double* a, const double* b, int d) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int k = 0;
    for (; k + 4 <= d; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < d; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

inline void preactivation(const network::NetworkState& st, const Matrix& X, Workspace& ws, Eigen::Index i, int j) {
    ws.z(i, j) = dot(X.row(i).data(), st.W.row(j).data(), st.dim()) + st.b[j];
}

inline void output(const network::NetworkState& st, const Vector& y, LossMode loss, Workspace& ws, Eigen::Index i) {
    const int N = st.width();
    double f = 0.0;
    for (int j = 0; j < N; ++j) f += st.a[j] * st.activations[j].eval(ws.z(i, j));
    ws.f[i] = f / N;
    ws.resid[i] = loss == LossMode::Squared ? y[i] - ws.f[i] : y[i];
}

inline void coefficient(const network::NetworkState& st, Workspace& ws, Eigen::Index i, int j) {
    ws.coef(i, j) = ws.resid[i] * st.activations[j].deriv(ws.z(i, j));
}

/// Accumulates, projects and applies the update of neuron j.
inline void update(network::NetworkState& st, const Matrix& X, const Matrix& proj, double scale,
                   const Workspace& ws, int j, double* g) {
    const int d = st.dim();
    const auto B = X.rows();
    for (int k = 0; k < d; ++k) g[k] = 0.0;
    for (Eigen::Index i = 0; i < B; ++i) {
        const double c = ws.coef(i, j);
        const double* x = X.row(i).data();
        for (int k = 0; k < d; ++k) g[k] += c * x[k];
    }
    const double* p = proj.row(j).data();
    const double pg = dot(p, g, d);
    const double s = scale * st.a[j];
    double* w = st.W.row(j).data();
    for (int k = 0; k < d; ++k) w[k] += s * (g[k] - pg * p[k]);
}

// Batches at least this large go through the blocked (matrix-product) path.
inline constexpr Eigen::Index kBlockedMinBatch = 32;
// Neurons per block; blocks are the unit of parallel work, so both backends
// evaluate exactly the same products.
inline constexpr int kNeuronBlock = 32;

inline int block_count(int N) { return (N + kNeuronBlock - 1) / kNeuronBlock; }

inline void preactivation_block(const network::NetworkState& st, const Matrix& X, Workspace& ws, int blk) {
    const int j0 = blk * kNeuronBlock;
    const int nj = std::min(kNeuronBlock, st.width() - j0);
    ws.z.middleCols(j0, nj).noalias() = X * st.W.middleRows(j0, nj).transpose();
    for (int j = j0; j < j0 + nj; ++j) ws.z.col(j).array() += st.b[j];
}

/// Gradient sums of one neuron block, then the projected update.
inline void update_block(network::NetworkState& st, const Matrix& X, const Matrix& proj, double scale,
                         Workspace& ws, int blk, Matrix& g) {
    const int j0 = blk * kNeuronBlock;
    const int nj = std::min(kNeuronBlock, st.width() - j0);
    const int d = st.dim();
    g.resize(nj, d);
    g.noalias() = ws.coef.middleCols(j0, nj).transpose() * X;
    for (int r = 0; r < nj; ++r) {
        const int j = j0 + r;
        const double* p = proj.row(j).data();
        const double* gr = g.row(r).data();
        const double pg = dot(p, gr, d);
        const double s = scale * st.a[j];
        double* w = st.W.row(j).data();
        for (int k = 0; k < d; ++k) w[k] += s * (gr[k] - pg * p[k]);
    }
}

inline void prepare(const network::NetworkState& st, const Matrix& X, Workspace& ws) {
    const auto B = X.rows();
    const int N = st.width();
    if (ws.z.rows() != B || ws.z.cols() != N) {
        ws.z.resize(B, N);
        ws.coef.resize(B, N);
    }
    ws.f.resize(B);
    ws.resid.resize(B);
}

}  // namespace reuse::kernels::detail
