#include "wildfire/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace wildfire::ops {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

void check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite())
        throw OptimError(std::string(op) + " produced a non-finite value");
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

// Is b's shape a suffix of a's?
bool suffix_shape(const Tensor& a, const Tensor& b) {
    if (b.ndim() > a.ndim()) return false;
    const int off = a.ndim() - b.ndim();
    for (int i = 0; i < b.ndim(); ++i)
        if (a.shape()[static_cast<std::size_t>(off + i)] != b.shape()[static_cast<std::size_t>(i)])
            return false;
    return true;
}

// C[m x n] (+)= A[m x k] * B[k x n], optionally with A and/or B transposed
// relative to their storage.
void gemm(const double* a, const double* b, double* c, int m, int n, int k,
          bool a_trans, bool b_trans) {
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double av = a_trans ? a[p * m + i] : a[i * k + p];
            if (av == 0.0) continue;
            const double* brow = b_trans ? nullptr : b + static_cast<std::size_t>(p) * n;
            double* crow = c + static_cast<std::size_t>(i) * n;
            if (!b_trans) {
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            } else {
                for (int j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
            }
        }
    }
}

int conv_out_dim(int in, int kernel, int stride, int pad, const char* what) {
    if (kernel > in + 2 * pad)
        throw ConfigError(std::string(what) + ": kernel " + std::to_string(kernel) +
                          " exceeds padded input " + std::to_string(in + 2 * pad));
    const int out = (in + 2 * pad - kernel) / stride + 1;
    if (out <= 0)
        throw ConfigError(std::string(what) + ": non-positive output dimension");
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    if (!same_shape(a, b) && !suffix_shape(a, b))
        throw DimensionError("add: " + shape_str(b.shape()) + " does not broadcast onto " +
                             shape_str(a.shape()));
    Tensor out(a.shape());
    const std::size_t bn = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[bn == a.size() ? i : i % bn];
    if (grad_enabled({&a, &b})) {
        record_op(out, [a = a, b = b, out]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            if (a.requires_grad()) {
                a.ensure_grad();
                auto ga = a.grad();
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                auto gb = b.grad();
                const std::size_t bn = b.size();
                for (std::size_t i = 0; i < g.size(); ++i) gb[i % bn] += g[i];
            }
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!same_shape(a, b)) throw DimensionError("sub: shapes differ");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    if (grad_enabled({&a, &b})) {
        record_op(out, [a = a, b = b, out]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            if (a.requires_grad()) {
                a.ensure_grad();
                auto ga = a.grad();
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                auto gb = b.grad();
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (!same_shape(a, b)) throw DimensionError("mul: shapes differ");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    if (grad_enabled({&a, &b})) {
        record_op(out, [a = a, b = b, out]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            if (a.requires_grad()) {
                a.ensure_grad();
                auto ga = a.grad();
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                auto gb = b.grad();
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * c;
    if (grad_enabled({&a})) {
        record_op(out, [a = a, out, c]() mutable {
            if (!out.has_grad()) return;
            a.ensure_grad();
            auto g = out.grad();
            auto ga = a.grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
        });
    }
    return out;
}

Tensor reshape(const Tensor& t, Shape shape) {
    if (shape_numel(shape) != t.size())
        throw DimensionError("reshape: element count changes from " + shape_str(t.shape()) +
                             " to " + shape_str(shape));
    Tensor out(std::move(shape), std::vector<double>(t.values().begin(), t.values().end()));
    if (grad_enabled({&t})) {
        record_op(out, [t = t, out]() mutable {
            if (!out.has_grad()) return;
            t.ensure_grad();
            auto g = out.grad();
            auto gt = t.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
        });
    }
    return out;
}

namespace {

std::vector<std::size_t> row_major_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i)
        st[static_cast<std::size_t>(i)] =
            st[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(s[static_cast<std::size_t>(i + 1)]);
    return st;
}

// Maps every linear index of the permuted output back to its source index.
std::vector<std::size_t> permutation_map(const Shape& in_shape, const std::vector<int>& axes) {
    const std::size_t n = shape_numel(in_shape);
    Shape out_shape(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i)
        out_shape[i] = in_shape[static_cast<std::size_t>(axes[i])];
    const auto in_strides = row_major_strides(in_shape);
    const auto out_strides = row_major_strides(out_shape);
    std::vector<std::size_t> map(n);
    std::vector<int> idx(axes.size(), 0);
    for (std::size_t lin = 0; lin < n; ++lin) {
        std::size_t rem = lin;
        std::size_t src = 0;
        for (std::size_t d = 0; d < axes.size(); ++d) {
            const std::size_t q = rem / out_strides[d];
            rem %= out_strides[d];
            src += q * in_strides[static_cast<std::size_t>(axes[d])];
        }
        map[lin] = src;
    }
    return map;
}

}  // namespace

Tensor permute(const Tensor& t, const std::vector<int>& axes) {
    if (static_cast<int>(axes.size()) != t.ndim())
        throw DimensionError("permute: axis list length mismatch");
    std::vector<bool> seen(axes.size(), false);
    for (int a : axes) {
        if (a < 0 || a >= t.ndim() || seen[static_cast<std::size_t>(a)])
            throw DimensionError("permute: invalid axis permutation");
        seen[static_cast<std::size_t>(a)] = true;
    }
    Shape out_shape(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i)
        out_shape[i] = t.shape()[static_cast<std::size_t>(axes[i])];
    auto map = permutation_map(t.shape(), axes);
    Tensor out(out_shape);
    for (std::size_t i = 0; i < map.size(); ++i) out[i] = t[map[i]];
    if (grad_enabled({&t})) {
        record_op(out, [t = t, out, map = std::move(map)]() mutable {
            if (!out.has_grad()) return;
            t.ensure_grad();
            auto g = out.grad();
            auto gt = t.grad();
            for (std::size_t i = 0; i < map.size(); ++i) gt[map[i]] += g[i];
        });
    }
    return out;
}

namespace {

struct AxisSplit {
    std::size_t outer, axis, inner;
};

AxisSplit split_at(const Shape& s, int axis) {
    AxisSplit r{1, static_cast<std::size_t>(s[static_cast<std::size_t>(axis)]), 1};
    for (int i = 0; i < axis; ++i) r.outer *= static_cast<std::size_t>(s[static_cast<std::size_t>(i)]);
    for (int i = axis + 1; i < static_cast<int>(s.size()); ++i)
        r.inner *= static_cast<std::size_t>(s[static_cast<std::size_t>(i)]);
    return r;
}

}  // namespace

Tensor slice(const Tensor& t, int axis, int start, int len) {
    if (axis < 0 || axis >= t.ndim()) throw DimensionError("slice: axis out of range");
    const int extent = t.shape()[static_cast<std::size_t>(axis)];
    if (start < 0 || len <= 0 || start + len > extent)
        throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                             std::to_string(start + len) + ") outside axis of size " +
                             std::to_string(extent));
    Shape out_shape = t.shape();
    out_shape[static_cast<std::size_t>(axis)] = len;
    const auto sp = split_at(t.shape(), axis);
    Tensor out(out_shape);
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (int j = 0; j < len; ++j)
            std::memcpy(&out[(o * static_cast<std::size_t>(len) + static_cast<std::size_t>(j)) * sp.inner],
                        &t[(o * sp.axis + static_cast<std::size_t>(start + j)) * sp.inner],
                        sp.inner * sizeof(double));
    if (grad_enabled({&t})) {
        record_op(out, [t = t, out, sp, start, len]() mutable {
            if (!out.has_grad()) return;
            t.ensure_grad();
            auto g = out.grad();
            auto gt = t.grad();
            for (std::size_t o = 0; o < sp.outer; ++o)
                for (int j = 0; j < len; ++j) {
                    const std::size_t dst = (o * sp.axis + static_cast<std::size_t>(start + j)) * sp.inner;
                    const std::size_t src = (o * static_cast<std::size_t>(len) + static_cast<std::size_t>(j)) * sp.inner;
                    for (std::size_t i = 0; i < sp.inner; ++i) gt[dst + i] += g[src + i];
                }
        });
    }
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    const int nd = parts.front().ndim();
    if (axis < 0 || axis >= nd) throw DimensionError("concat: axis out of range");
    int total = 0;
    for (const Tensor& p : parts) {
        if (p.ndim() != nd) throw DimensionError("concat: rank mismatch");
        for (int d = 0; d < nd; ++d)
            if (d != axis && p.shape()[static_cast<std::size_t>(d)] !=
                                 parts.front().shape()[static_cast<std::size_t>(d)])
                throw DimensionError("concat: off-axis dimension mismatch");
        total += p.shape()[static_cast<std::size_t>(axis)];
    }
    Shape out_shape = parts.front().shape();
    out_shape[static_cast<std::size_t>(axis)] = total;
    Tensor out(out_shape);
    const auto osp = split_at(out_shape, axis);
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const Tensor& p : parts) {
        offsets.push_back(offset);
        const auto psp = split_at(p.shape(), axis);
        for (std::size_t o = 0; o < psp.outer; ++o)
            std::memcpy(&out[(o * osp.axis + offset) * osp.inner], &p[o * psp.axis * psp.inner],
                        psp.axis * psp.inner * sizeof(double));
        offset += psp.axis;
    }
    bool any_grad = false;
    for (const Tensor& p : parts) any_grad = any_grad || grad_enabled({&p});
    if (any_grad) {
        record_op(out, [parts = parts, out, osp, offsets]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                Tensor& p = parts[pi];
                if (!p.requires_grad()) continue;
                p.ensure_grad();
                auto gp = p.grad();
                const std::size_t axis_len = p.size() / (osp.outer * osp.inner);
                for (std::size_t o = 0; o < osp.outer; ++o)
                    for (std::size_t j = 0; j < axis_len; ++j)
                        for (std::size_t i = 0; i < osp.inner; ++i)
                            gp[(o * axis_len + j) * osp.inner + i] +=
                                g[(o * osp.axis + offsets[pi] + j) * osp.inner + i];
            }
        });
    }
    return out;
}

Tensor expand_leading(const Tensor& t, int copies) {
    if (copies <= 0) throw DimensionError("expand_leading: copies must be positive");
    Shape out_shape;
    out_shape.push_back(copies);
    out_shape.insert(out_shape.end(), t.shape().begin(), t.shape().end());
    Tensor out(out_shape);
    const std::size_t n = t.size();
    for (int c = 0; c < copies; ++c)
        std::memcpy(&out[static_cast<std::size_t>(c) * n], &t[0], n * sizeof(double));
    if (grad_enabled({&t})) {
        record_op(out, [t = t, out, copies]() mutable {
            if (!out.has_grad()) return;
            t.ensure_grad();
            auto g = out.grad();
            auto gt = t.grad();
            const std::size_t n = t.size();
            for (int c = 0; c < copies; ++c)
                for (std::size_t i = 0; i < n; ++i) gt[i] += g[static_cast<std::size_t>(c) * n + i];
        });
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() < 2 || b.ndim() < 2) throw DimensionError("matmul: operands must be at least 2-D");
    const int m = a.dim(-2), k = a.dim(-1);
    const int kb = b.dim(-2), n = b.dim(-1);
    if (k != kb)
        throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    const bool shared_b = (b.ndim() == 2 && a.ndim() > 2);
    if (!shared_b && a.ndim() != b.ndim())
        throw DimensionError("matmul: rank mismatch without a shared 2-D right operand");
    Shape lead(a.shape().begin(), a.shape().end() - 2);
    if (!shared_b && b.ndim() > 2) {
        Shape lead_b(b.shape().begin(), b.shape().end() - 2);
        if (lead != lead_b) throw DimensionError("matmul: batch dimensions disagree");
    }
    std::size_t batch = 1;
    for (int d : lead) batch *= static_cast<std::size_t>(d);

    Shape out_shape = lead;
    out_shape.push_back(m);
    out_shape.push_back(n);
    Tensor out(out_shape);

    const std::size_t a_step = static_cast<std::size_t>(m) * k;
    const std::size_t b_step = shared_b ? 0 : static_cast<std::size_t>(k) * n;
    const std::size_t o_step = static_cast<std::size_t>(m) * n;
    for (std::size_t t = 0; t < batch; ++t)
        gemm(&a[t * a_step], &b[t * b_step], &out[t * o_step], m, n, k, false, false);
    check_finite(out, "matmul");

    if (grad_enabled({&a, &b})) {
        record_op(out, [a = a, b = b, out, batch, a_step, b_step, o_step, m, n, k]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            if (a.requires_grad()) {
                a.ensure_grad();
                auto ga = a.grad();
                for (std::size_t t = 0; t < batch; ++t)
                    gemm(&g[t * o_step], &b[t * b_step], &ga[t * a_step], m, k, n, false, true);
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                auto gb = b.grad();
                for (std::size_t t = 0; t < batch; ++t)
                    gemm(&a[t * a_step], &g[t * o_step], &gb[t * b_step], k, n, m, true, false);
            }
        });
    }
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor* bias,
              int stride_h, int stride_w, int pad_h, int pad_w) {
    if (input.ndim() == 3) {
        Shape batched{1, input.dim(0), input.dim(1), input.dim(2)};
        Tensor out4 = conv2d(reshape(input, batched), kernels, bias, stride_h, stride_w, pad_h, pad_w);
        return reshape(out4, Shape(out4.shape().begin() + 1, out4.shape().end()));
    }
    if (input.ndim() != 4 || kernels.ndim() != 4)
        throw DimensionError("conv2d: expects [B,C,H,W] input and [Co,Ci,kh,kw] kernels");
    if (stride_h <= 0 || stride_w <= 0 || pad_h < 0 || pad_w < 0)
        throw ConfigError("conv2d: stride must be positive and padding non-negative");
    const int B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int Co = kernels.dim(0), Ci = kernels.dim(1), kh = kernels.dim(2), kw = kernels.dim(3);
    if (C != Ci) throw DimensionError("conv2d: input channels " + std::to_string(C) +
                                      " do not match kernel channels " + std::to_string(Ci));
    if (bias && (bias->ndim() != 1 || bias->dim(0) != Co))
        throw DimensionError("conv2d: bias must be [C_out]");
    const int Ho = conv_out_dim(H, kh, stride_h, pad_h, "conv2d");
    const int Wo = conv_out_dim(W, kw, stride_w, pad_w, "conv2d");

    Tensor out(Shape{B, Co, Ho, Wo});
    const std::size_t in_c = static_cast<std::size_t>(H) * W;
    const std::size_t in_b = in_c * static_cast<std::size_t>(C);
    const std::size_t k_c = static_cast<std::size_t>(kh) * kw;
    const std::size_t k_o = k_c * static_cast<std::size_t>(Ci);
    const std::size_t out_c = static_cast<std::size_t>(Ho) * Wo;
    const std::size_t out_b = out_c * static_cast<std::size_t>(Co);

    for (int b = 0; b < B; ++b) {
        for (int co = 0; co < Co; ++co) {
            const double bias_v = bias ? (*bias)[static_cast<std::size_t>(co)] : 0.0;
            for (int oh = 0; oh < Ho; ++oh) {
                for (int ow = 0; ow < Wo; ++ow) {
                    double acc = bias_v;
                    const int ih0 = oh * stride_h - pad_h;
                    const int iw0 = ow * stride_w - pad_w;
                    for (int ci = 0; ci < C; ++ci) {
                        const double* in_plane = &input[static_cast<std::size_t>(b) * in_b +
                                                        static_cast<std::size_t>(ci) * in_c];
                        const double* k_plane = &kernels[static_cast<std::size_t>(co) * k_o +
                                                         static_cast<std::size_t>(ci) * k_c];
                        for (int r = 0; r < kh; ++r) {
                            const int ih = ih0 + r;
                            if (ih < 0 || ih >= H) continue;
                            const double* in_row = in_plane + static_cast<std::size_t>(ih) * W;
                            const double* k_row = k_plane + static_cast<std::size_t>(r) * kw;
                            for (int c2 = 0; c2 < kw; ++c2) {
                                const int iw = iw0 + c2;
                                if (iw < 0 || iw >= W) continue;
                                acc += k_row[c2] * in_row[iw];
                            }
                        }
                    }
                    out[static_cast<std::size_t>(b) * out_b + static_cast<std::size_t>(co) * out_c +
                        static_cast<std::size_t>(oh) * Wo + static_cast<std::size_t>(ow)] = acc;
                }
            }
        }
    }
    check_finite(out, "conv2d");

    Tensor bias_t = bias ? *bias : Tensor();
    if (grad_enabled({&input, &kernels, bias})) {
        record_op(out, [input = input, kernels = kernels, bias_t, out, B, C, H, W, Co, kh, kw, Ho, Wo,
                        stride_h, stride_w, pad_h, pad_w, in_b, in_c, k_o, k_c, out_b, out_c]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            const bool gi = input.requires_grad();
            const bool gk = kernels.requires_grad();
            const bool gb = bias_t.defined() && bias_t.requires_grad();
            if (gi) input.ensure_grad();
            if (gk) kernels.ensure_grad();
            if (gb) bias_t.ensure_grad();
            for (int b = 0; b < B; ++b) {
                for (int co = 0; co < Co; ++co) {
                    for (int oh = 0; oh < Ho; ++oh) {
                        for (int ow = 0; ow < Wo; ++ow) {
                            const double gv = g[static_cast<std::size_t>(b) * out_b +
                                                static_cast<std::size_t>(co) * out_c +
                                                static_cast<std::size_t>(oh) * Wo +
                                                static_cast<std::size_t>(ow)];
                            if (gv == 0.0) continue;
                            if (gb) bias_t.grad()[static_cast<std::size_t>(co)] += gv;
                            const int ih0 = oh * stride_h - pad_h;
                            const int iw0 = ow * stride_w - pad_w;
                            for (int ci = 0; ci < C; ++ci) {
                                const std::size_t in_off = static_cast<std::size_t>(b) * in_b +
                                                           static_cast<std::size_t>(ci) * in_c;
                                const std::size_t k_off = static_cast<std::size_t>(co) * k_o +
                                                          static_cast<std::size_t>(ci) * k_c;
                                for (int r = 0; r < kh; ++r) {
                                    const int ih = ih0 + r;
                                    if (ih < 0 || ih >= H) continue;
                                    for (int c2 = 0; c2 < kw; ++c2) {
                                        const int iw = iw0 + c2;
                                        if (iw < 0 || iw >= W) continue;
                                        const std::size_t ii = in_off + static_cast<std::size_t>(ih) * W +
                                                               static_cast<std::size_t>(iw);
                                        const std::size_t ki = k_off + static_cast<std::size_t>(r) * kw +
                                                               static_cast<std::size_t>(c2);
                                        if (gi) input.grad()[ii] += gv * kernels[ki];
                                        if (gk) kernels.grad()[ki] += gv * input[ii];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor* bias,
              int stride, int padding) {
    return conv2d(input, kernels, bias, stride, stride, padding, padding);
}

Tensor maxpool2d(const Tensor& input, int k, int stride, int padding) {
    if (input.ndim() == 3) {
        Shape batched{1, input.dim(0), input.dim(1), input.dim(2)};
        Tensor out4 = maxpool2d(reshape(input, batched), k, stride, padding);
        return reshape(out4, Shape(out4.shape().begin() + 1, out4.shape().end()));
    }
    if (input.ndim() != 4) throw DimensionError("maxpool2d: expects [B,C,H,W] input");
    if (k <= 0 || stride <= 0 || padding < 0) throw ConfigError("maxpool2d: bad window parameters");
    if (padding >= k)
        throw ConfigError("maxpool2d: padding must be smaller than the window so every window sees a real cell");
    const int B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int Ho = conv_out_dim(H, k, stride, padding, "maxpool2d");
    const int Wo = conv_out_dim(W, k, stride, padding, "maxpool2d");

    Tensor out(Shape{B, C, Ho, Wo});
    std::vector<std::size_t> argmax(out.size());
    const std::size_t in_c = static_cast<std::size_t>(H) * W;
    std::size_t oi = 0;
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const std::size_t plane = (static_cast<std::size_t>(b) * C + c) * in_c;
            for (int oh = 0; oh < Ho; ++oh) {
                for (int ow = 0; ow < Wo; ++ow, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_i = 0;
                    const int ih0 = oh * stride - padding;
                    const int iw0 = ow * stride - padding;
                    for (int r = 0; r < k; ++r) {
                        const int ih = ih0 + r;
                        if (ih < 0 || ih >= H) continue;
                        for (int c2 = 0; c2 < k; ++c2) {
                            const int iw = iw0 + c2;
                            if (iw < 0 || iw >= W) continue;
                            const std::size_t ii = plane + static_cast<std::size_t>(ih) * W +
                                                   static_cast<std::size_t>(iw);
                            if (input[ii] > best) {  // strict: first index wins ties
                                best = input[ii];
                                best_i = ii;
                            }
                        }
                    }
                    out[oi] = best;
                    argmax[oi] = best_i;
                }
            }
        }
    }

    if (grad_enabled({&input})) {
        record_op(out, [input = input, out, argmax = std::move(argmax)]() mutable {
            if (!out.has_grad()) return;
            input.ensure_grad();
            auto g = out.grad();
            auto gi = input.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gi[argmax[i]] += g[i];
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x[i] > 0.0) gx[i] += g[i];
        });
    }
    return out;
}

Tensor gelu(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] * 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double cdf = 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
                const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x[i] * x[i]);
                gx[i] += g[i] * (cdf + x[i] * pdf);
            }
        });
    }
    return out;
}

Tensor logistic(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * out[i] * (1.0 - out[i]);
        });
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    if (x.ndim() < 1) throw DimensionError("softmax_rows: needs at least one axis");
    const std::size_t cols = static_cast<std::size_t>(x.dim(-1));
    const std::size_t rows = x.size() / cols;
    Tensor out(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = &x[r * cols];
        double* o = &out[r * cols];
        double mx = in[0];
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            o[j] = std::exp(in[j] - mx);
            denom += o[j];
        }
        for (std::size_t j = 0; j < cols; ++j) o[j] /= denom;
    }
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out, rows, cols]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t r = 0; r < rows; ++r) {
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * out[r * cols + j];
                for (std::size_t j = 0; j < cols; ++j)
                    gx[r * cols + j] += out[r * cols + j] * (g[r * cols + j] - dot);
            }
        });
    }
    return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t cols = static_cast<std::size_t>(x.dim(-1));
    if (gamma.size() != cols || beta.size() != cols)
        throw DimensionError("layernorm: scale/shift must match the last axis");
    const std::size_t rows = x.size() / cols;
    Tensor out(x.shape());
    std::vector<double> inv_sigma(rows), mu(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = &x[r * cols];
        double m = 0.0;
        for (std::size_t j = 0; j < cols; ++j) m += in[j];
        m /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t j = 0; j < cols; ++j) var += (in[j] - m) * (in[j] - m);
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + eps);
        mu[r] = m;
        inv_sigma[r] = inv;
        for (std::size_t j = 0; j < cols; ++j)
            out[r * cols + j] = (in[j] - m) * inv * gamma[j] + beta[j];
    }
    if (grad_enabled({&x, &gamma, &beta})) {
        record_op(out, [x = x, gamma = gamma, beta = beta, out, rows, cols, mu = std::move(mu),
                        inv_sigma = std::move(inv_sigma)]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            const bool gx_on = x.requires_grad();
            const bool gg_on = gamma.requires_grad();
            const bool gb_on = beta.requires_grad();
            if (gx_on) x.ensure_grad();
            if (gg_on) gamma.ensure_grad();
            if (gb_on) beta.ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const double inv = inv_sigma[r];
                double sum_gh = 0.0, sum_gh_xhat = 0.0;
                for (std::size_t j = 0; j < cols; ++j) {
                    const double xhat = (x[r * cols + j] - mu[r]) * inv;
                    const double gh = g[r * cols + j] * gamma[j];
                    sum_gh += gh;
                    sum_gh_xhat += gh * xhat;
                    if (gg_on) gamma.grad()[j] += g[r * cols + j] * xhat;
                    if (gb_on) beta.grad()[j] += g[r * cols + j];
                }
                if (gx_on) {
                    const double n = static_cast<double>(cols);
                    for (std::size_t j = 0; j < cols; ++j) {
                        const double xhat = (x[r * cols + j] - mu[r]) * inv;
                        const double gh = g[r * cols + j] * gamma[j];
                        x.grad()[r * cols + j] += inv * (gh - sum_gh / n - xhat * sum_gh_xhat / n);
                    }
                }
            }
        });
    }
    return out;
}

namespace {

// Views x as [outer, channels, inner] for per-channel statistics.
struct BnLayout {
    std::size_t outer, channels, inner;
};

BnLayout bn_layout(const Tensor& x) {
    if (x.ndim() == 2)
        return {static_cast<std::size_t>(x.dim(0)), static_cast<std::size_t>(x.dim(1)), 1};
    if (x.ndim() == 4)
        return {static_cast<std::size_t>(x.dim(0)), static_cast<std::size_t>(x.dim(1)),
                static_cast<std::size_t>(x.dim(2)) * static_cast<std::size_t>(x.dim(3))};
    throw DimensionError("batchnorm: expects [B,F] or [B,C,H,W] input");
}

}  // namespace

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 Tensor& running_mean, Tensor& running_var, double momentum,
                 double eps, Mode mode) {
    const BnLayout L = bn_layout(x);
    if (gamma.size() != L.channels || beta.size() != L.channels ||
        running_mean.size() != L.channels || running_var.size() != L.channels)
        throw DimensionError("batchnorm: parameter width does not match channel count");
    const std::size_t count = L.outer * L.inner;
    const bool train = mode == Mode::Train;
    if (train && count < 2)
        throw DimensionError("batchnorm: train mode requires batch size >= 2 (variance undefined)");

    std::vector<double> mean(L.channels), inv_sigma(L.channels);
    if (train) {
        for (std::size_t c = 0; c < L.channels; ++c) {
            double m = 0.0;
            for (std::size_t o = 0; o < L.outer; ++o) {
                const double* p = &x[(o * L.channels + c) * L.inner];
                for (std::size_t i = 0; i < L.inner; ++i) m += p[i];
            }
            m /= static_cast<double>(count);
            double var = 0.0;
            for (std::size_t o = 0; o < L.outer; ++o) {
                const double* p = &x[(o * L.channels + c) * L.inner];
                for (std::size_t i = 0; i < L.inner; ++i) var += (p[i] - m) * (p[i] - m);
            }
            var /= static_cast<double>(count);
            mean[c] = m;
            inv_sigma[c] = 1.0 / std::sqrt(var + eps);
            running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * m;
            running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var;
        }
    } else {
        for (std::size_t c = 0; c < L.channels; ++c) {
            mean[c] = running_mean[c];
            inv_sigma[c] = 1.0 / std::sqrt(running_var[c] + eps);
        }
    }

    Tensor out(x.shape());
    for (std::size_t o = 0; o < L.outer; ++o)
        for (std::size_t c = 0; c < L.channels; ++c) {
            const double* p = &x[(o * L.channels + c) * L.inner];
            double* q = &out[(o * L.channels + c) * L.inner];
            for (std::size_t i = 0; i < L.inner; ++i)
                q[i] = (p[i] - mean[c]) * inv_sigma[c] * gamma[c] + beta[c];
        }

    if (grad_enabled({&x, &gamma, &beta})) {
        record_op(out, [x = x, gamma = gamma, beta = beta, out, L, count, train, mean = std::move(mean),
                        inv_sigma = std::move(inv_sigma)]() mutable {
            if (!out.has_grad()) return;
            auto g = out.grad();
            const bool gx_on = x.requires_grad();
            const bool gg_on = gamma.requires_grad();
            const bool gb_on = beta.requires_grad();
            if (gx_on) x.ensure_grad();
            if (gg_on) gamma.ensure_grad();
            if (gb_on) beta.ensure_grad();
            for (std::size_t c = 0; c < L.channels; ++c) {
                double sum_g = 0.0, sum_g_xhat = 0.0;
                for (std::size_t o = 0; o < L.outer; ++o) {
                    const std::size_t base = (o * L.channels + c) * L.inner;
                    for (std::size_t i = 0; i < L.inner; ++i) {
                        const double xhat = (x[base + i] - mean[c]) * inv_sigma[c];
                        sum_g += g[base + i];
                        sum_g_xhat += g[base + i] * xhat;
                    }
                }
                if (gg_on) gamma.grad()[c] += sum_g_xhat;
                if (gb_on) beta.grad()[c] += sum_g;
                if (!gx_on) continue;
                const double n = static_cast<double>(count);
                for (std::size_t o = 0; o < L.outer; ++o) {
                    const std::size_t base = (o * L.channels + c) * L.inner;
                    for (std::size_t i = 0; i < L.inner; ++i) {
                        const double xhat = (x[base + i] - mean[c]) * inv_sigma[c];
                        double dx = g[base + i];
                        if (train) dx -= sum_g / n + xhat * sum_g_xhat / n;
                        x.grad()[base + i] += gamma[c] * inv_sigma[c] * dx;
                    }
                }
            }
        });
    }
    return out;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, Mode mode) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must lie in [0, 1)");
    if (mode == Mode::Eval || rate == 0.0) return x;
    const double inv_keep = 1.0 / (1.0 - rate);
    std::vector<double> mask(x.size());
    for (double& m : mask) m = (rng.uniform() < rate) ? 0.0 : inv_keep;
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out, mask = std::move(mask)]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
        });
    }
    return out;
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
    Tensor out = Tensor::scalar(acc);
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            const double g = out.grad()[0];
            auto gx = x.grad();
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
    const double n = static_cast<double>(x.size());
    Tensor out = Tensor::scalar(acc / n);
    if (grad_enabled({&x})) {
        record_op(out, [x = x, out, n]() mutable {
            if (!out.has_grad()) return;
            x.ensure_grad();
            const double g = out.grad()[0] / n;
            auto gx = x.grad();
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        });
    }
    return out;
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw DimensionError("mse_loss: shapes differ, " + shape_str(pred.shape()) + " vs " +
                             shape_str(target.shape()));
    if (pred.size() == 0) throw DimensionError("mse_loss: empty input");
    const double n = static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    Tensor out = Tensor::scalar(acc / n);
    check_finite(out, "mse_loss");
    if (grad_enabled({&pred, &target})) {
        record_op(out, [pred = pred, target = target, out, n]() mutable {
            if (!out.has_grad()) return;
            const double g = out.grad()[0];
            if (pred.requires_grad()) {
                pred.ensure_grad();
                auto gp = pred.grad();
                for (std::size_t i = 0; i < gp.size(); ++i)
                    gp[i] += g * 2.0 * (pred[i] - target[i]) / n;
            }
            if (target.requires_grad()) {
                target.ensure_grad();
                auto gt = target.grad();
                for (std::size_t i = 0; i < gt.size(); ++i)
                    gt[i] -= g * 2.0 * (pred[i] - target[i]) / n;
            }
        });
    }
    return out;
}

Tensor cross_entropy_loss(const Tensor& logits, const Tensor& onehot) {
    if (logits.ndim() != 2 || onehot.shape() != logits.shape())
        throw DimensionError("cross_entropy_loss: expects matching [B,C] logits and one-hot labels");
    const std::size_t B = static_cast<std::size_t>(logits.dim(0));
    const std::size_t C = static_cast<std::size_t>(logits.dim(1));
    for (std::size_t r = 0; r < B; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double v = onehot[r * C + c];
            if (v != 0.0 && v != 1.0)
                throw DataError("cross_entropy_loss: row " + std::to_string(r) + " is not one-hot");
            s += v;
        }
        if (s != 1.0)
            throw DataError("cross_entropy_loss: row " + std::to_string(r) + " is not one-hot");
    }

    std::vector<double> softmax(B * C);
    double loss = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
        double mx = logits[r * C];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits[r * C + c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            softmax[r * C + c] = std::exp(logits[r * C + c] - mx);
            denom += softmax[r * C + c];
        }
        const double lse = mx + std::log(denom);
        for (std::size_t c = 0; c < C; ++c) {
            softmax[r * C + c] /= denom;
            if (onehot[r * C + c] == 1.0) loss += lse - logits[r * C + c];
        }
    }
    Tensor out = Tensor::scalar(loss / static_cast<double>(B));
    check_finite(out, "cross_entropy_loss");
    if (grad_enabled({&logits})) {
        record_op(out, [logits = logits, onehot = onehot, out, B, C, softmax = std::move(softmax)]() mutable {
            if (!out.has_grad()) return;
            logits.ensure_grad();
            const double g = out.grad()[0] / static_cast<double>(B);
            auto gl = logits.grad();
            for (std::size_t i = 0; i < B * C; ++i) gl[i] += g * (softmax[i] - onehot[i]);
        });
    }
    return out;
}

}  // namespace wildfire::ops
