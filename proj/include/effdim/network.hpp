#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "effdim/dual.hpp"
#include "effdim/tensor.hpp"

namespace effdim {

enum class Family { mlp, smallcnn };

struct ModelSpec {
    Family family = Family::mlp;
    double width_multiplier = 1.0;
    std::vector<int> input_shape;  // {d} for mlp, {c,h,w} for smallcnn
    int class_count = 2;
    std::uint64_t init_seed = 0;
};

enum class LayerKind { dense, relu, conv3x3, avgpool2x2 };

// Feedforward layer descriptor. Geometry fields by kind:
//   dense:      in_dim, out_dim
//   conv3x3:    in_c, out_c, in_h, in_w   (valid padding, stride 1)
//   avgpool2x2: in_c, in_h, in_w          (floor division on odd dims)
//   relu:       dim
struct LayerDesc {
    LayerKind kind;
    int in_dim = 0, out_dim = 0;
    int in_c = 0, out_c = 0, in_h = 0, in_w = 0;
    std::size_t param_offset = 0;
    std::size_t param_count = 0;
    std::size_t out_size = 0;  // activation length produced by this layer
};

struct Network {
    ModelSpec spec;
    std::vector<LayerDesc> layers;
    std::vector<double> params;  // flat theta, layer-major, weights then bias
    std::size_t input_size = 0;

    std::size_t param_count() const { return params.size(); }
    int class_count() const { return spec.class_count; }
};

// Per-evaluation scratch. Reused across samples; one instance per thread.
template <class T>
struct Workspace {
    std::vector<std::vector<T>> acts;    // acts[0] = input, acts[i+1] = layer i output
    std::vector<std::vector<T>> deltas;  // same geometry as acts

    void prepare(const Network& net) {
        // a workspace may be reused across networks (thread-local callers),
        // so every buffer size must match, not just the layer count
        if (acts.size() == net.layers.size() + 1 &&
            acts[0].size() == net.input_size) {
            bool ok = true;
            for (std::size_t i = 0; i < net.layers.size(); ++i)
                if (acts[i + 1].size() != net.layers[i].out_size) ok = false;
            if (ok) return;
        }
        acts.assign(net.layers.size() + 1, {});
        deltas.assign(net.layers.size() + 1, {});
        acts[0].resize(net.input_size);
        deltas[0].resize(net.input_size);
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            acts[i + 1].resize(net.layers[i].out_size);
            deltas[i + 1].resize(net.layers[i].out_size);
        }
    }
};

namespace detail {

template <class T>
void dense_forward(const LayerDesc& L, std::span<const T> p,
                   std::span<const T> x, std::span<T> y) {
    const T* W = p.data() + L.param_offset;
    const T* b = W + static_cast<std::size_t>(L.in_dim) * L.out_dim;
    for (int o = 0; o < L.out_dim; ++o) {
        T acc = b[o];
        const T* w = W + static_cast<std::size_t>(o) * L.in_dim;
        for (int i = 0; i < L.in_dim; ++i) acc += w[i] * x[i];
        y[o] = acc;
    }
}

template <class T>
void dense_backward(const LayerDesc& L, std::span<const T> p,
                    std::span<const T> x, std::span<const T> dy,
                    std::span<T> grad, std::span<T> dx) {
    const T* W = p.data() + L.param_offset;
    const bool pg = !grad.empty();
    T* gW = pg ? grad.data() + L.param_offset : nullptr;
    T* gb = pg ? gW + static_cast<std::size_t>(L.in_dim) * L.out_dim : nullptr;
    for (int i = 0; i < L.in_dim; ++i) dx[i] = T(0.0);
    for (int o = 0; o < L.out_dim; ++o) {
        const T d = dy[o];
        const T* w = W + static_cast<std::size_t>(o) * L.in_dim;
        if (pg) {
            gb[o] += d;
            T* gw = gW + static_cast<std::size_t>(o) * L.in_dim;
            for (int i = 0; i < L.in_dim; ++i) {
                gw[i] += d * x[i];
                dx[i] += w[i] * d;
            }
        } else {
            for (int i = 0; i < L.in_dim; ++i) dx[i] += w[i] * d;
        }
    }
}

template <class T>
void conv3x3_forward(const LayerDesc& L, std::span<const T> p,
                     std::span<const T> x, std::span<T> y) {
    const int oh = L.in_h - 2, ow = L.in_w - 2;
    const T* W = p.data() + L.param_offset;  // [oc][ic][3][3]
    const T* b = W + static_cast<std::size_t>(L.out_c) * L.in_c * 9;
    for (int oc = 0; oc < L.out_c; ++oc) {
        const T* Wo = W + static_cast<std::size_t>(oc) * L.in_c * 9;
        for (int r = 0; r < oh; ++r)
            for (int c = 0; c < ow; ++c) {
                T acc = b[oc];
                for (int ic = 0; ic < L.in_c; ++ic) {
                    const T* xi = x.data() + static_cast<std::size_t>(ic) * L.in_h * L.in_w;
                    const T* w = Wo + static_cast<std::size_t>(ic) * 9;
                    for (int kr = 0; kr < 3; ++kr)
                        for (int kc = 0; kc < 3; ++kc)
                            acc += w[kr * 3 + kc] * xi[(r + kr) * L.in_w + (c + kc)];
                }
                y[(static_cast<std::size_t>(oc) * oh + r) * ow + c] = acc;
            }
    }
}

template <class T>
void conv3x3_backward(const LayerDesc& L, std::span<const T> p,
                      std::span<const T> x, std::span<const T> dy,
                      std::span<T> grad, std::span<T> dx) {
    const int oh = L.in_h - 2, ow = L.in_w - 2;
    const T* W = p.data() + L.param_offset;
    const bool pg = !grad.empty();
    T* gW = pg ? grad.data() + L.param_offset : nullptr;
    T* gb = pg ? gW + static_cast<std::size_t>(L.out_c) * L.in_c * 9 : nullptr;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = T(0.0);
    for (int oc = 0; oc < L.out_c; ++oc) {
        const T* Wo = W + static_cast<std::size_t>(oc) * L.in_c * 9;
        T* gWo = pg ? gW + static_cast<std::size_t>(oc) * L.in_c * 9 : nullptr;
        for (int r = 0; r < oh; ++r)
            for (int c = 0; c < ow; ++c) {
                const T d = dy[(static_cast<std::size_t>(oc) * oh + r) * ow + c];
                if (pg) gb[oc] += d;
                for (int ic = 0; ic < L.in_c; ++ic) {
                    const T* xi = x.data() + static_cast<std::size_t>(ic) * L.in_h * L.in_w;
                    T* dxi = dx.data() + static_cast<std::size_t>(ic) * L.in_h * L.in_w;
                    const T* w = Wo + static_cast<std::size_t>(ic) * 9;
                    T* gw = pg ? gWo + static_cast<std::size_t>(ic) * 9 : nullptr;
                    for (int kr = 0; kr < 3; ++kr)
                        for (int kc = 0; kc < 3; ++kc) {
                            if (pg) gw[kr * 3 + kc] += d * xi[(r + kr) * L.in_w + (c + kc)];
                            dxi[(r + kr) * L.in_w + (c + kc)] += w[kr * 3 + kc] * d;
                        }
                }
            }
    }
}

template <class T>
void avgpool_forward(const LayerDesc& L, std::span<const T> x, std::span<T> y) {
    const int oh = L.in_h / 2, ow = L.in_w / 2;
    for (int c = 0; c < L.in_c; ++c) {
        const T* xi = x.data() + static_cast<std::size_t>(c) * L.in_h * L.in_w;
        T* yi = y.data() + static_cast<std::size_t>(c) * oh * ow;
        for (int r = 0; r < oh; ++r)
            for (int q = 0; q < ow; ++q) {
                T acc = xi[(2 * r) * L.in_w + 2 * q];
                acc += xi[(2 * r) * L.in_w + 2 * q + 1];
                acc += xi[(2 * r + 1) * L.in_w + 2 * q];
                acc += xi[(2 * r + 1) * L.in_w + 2 * q + 1];
                yi[r * ow + q] = acc * T(0.25);
            }
    }
}

template <class T>
void avgpool_backward(const LayerDesc& L, std::span<const T> dy, std::span<T> dx) {
    const int oh = L.in_h / 2, ow = L.in_w / 2;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = T(0.0);
    for (int c = 0; c < L.in_c; ++c) {
        const T* dyi = dy.data() + static_cast<std::size_t>(c) * oh * ow;
        T* dxi = dx.data() + static_cast<std::size_t>(c) * L.in_h * L.in_w;
        for (int r = 0; r < oh; ++r)
            for (int q = 0; q < ow; ++q) {
                const T d = dyi[r * ow + q] * T(0.25);
                dxi[(2 * r) * L.in_w + 2 * q] = d;
                dxi[(2 * r) * L.in_w + 2 * q + 1] = d;
                dxi[(2 * r + 1) * L.in_w + 2 * q] = d;
                dxi[(2 * r + 1) * L.in_w + 2 * q + 1] = d;
            }
    }
}

}  // namespace detail

// Forward pass. Input is always plain double; parameters carry the scalar
// type (Dual for HVP evaluation). Returns the logits span.
template <class T>
std::span<const T> forward_eval(const Network& net, std::span<const T> params,
                                std::span<const double> x, Workspace<T>& ws) {
    if (x.size() != net.input_size)
        throw ShapeError("forward: input has length " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(net.input_size));
    ws.prepare(net);
    for (std::size_t i = 0; i < x.size(); ++i) ws.acts[0][i] = T(x[i]);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerDesc& L = net.layers[li];
        std::span<const T> in = ws.acts[li];
        std::span<T> out = ws.acts[li + 1];
        switch (L.kind) {
            case LayerKind::dense:
                detail::dense_forward(L, params, in, out);
                break;
            case LayerKind::relu:
                for (std::size_t i = 0; i < in.size(); ++i) out[i] = relu(in[i]);
                break;
            case LayerKind::conv3x3:
                detail::conv3x3_forward(L, params, in, out);
                break;
            case LayerKind::avgpool2x2:
                detail::avgpool_forward(L, in, out);
                break;
        }
    }
    return ws.acts.back();
}

// Backward pass from dL/dlogits. Accumulates (+=) into grad; writes the
// input gradient into xgrad when non-empty. Requires a preceding
// forward_eval on the same workspace.
template <class T>
void backward_eval(const Network& net, std::span<const T> params,
                   Workspace<T>& ws, std::span<const T> dlogits,
                   std::span<T> grad, std::span<T> xgrad = {}) {
    const std::size_t n_layers = net.layers.size();
    std::copy(dlogits.begin(), dlogits.end(), ws.deltas[n_layers].begin());
    for (std::size_t li = n_layers; li-- > 0;) {
        const LayerDesc& L = net.layers[li];
        std::span<const T> in = ws.acts[li];
        std::span<const T> dy = ws.deltas[li + 1];
        std::span<T> dx = ws.deltas[li];
        switch (L.kind) {
            case LayerKind::dense:
                detail::dense_backward(L, params, in, dy, grad, dx);
                break;
            case LayerKind::relu:
                for (std::size_t i = 0; i < in.size(); ++i)
                    dx[i] = value_of(in[i]) > 0.0 ? dy[i] : T(0.0);
                break;
            case LayerKind::conv3x3:
                detail::conv3x3_backward(L, params, in, dy, grad, dx);
                break;
            case LayerKind::avgpool2x2:
                detail::avgpool_backward(L, dy, dx);
                break;
        }
    }
    if (!xgrad.empty())
        for (std::size_t i = 0; i < xgrad.size(); ++i) xgrad[i] = ws.deltas[0][i];
}

}  // namespace effdim
