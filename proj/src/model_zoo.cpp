#include "effdim/model_zoo.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "effdim/rng.hpp"

namespace effdim {

namespace {

constexpr int kMlpBaseWidth = 8;
constexpr int kCnnBaseChannels = 4;
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[4] = {'E', 'F', 'D', 'M'};

std::size_t dense_params(int in, int out) {
    return static_cast<std::size_t>(in) * out + out;
}

std::size_t conv_params(int in_c, int out_c) {
    return (static_cast<std::size_t>(in_c) * 9 + 1) * out_c;
}

void add_dense(Network& net, int in, int out) {
    LayerDesc L;
    L.kind = LayerKind::dense;
    L.in_dim = in;
    L.out_dim = out;
    L.param_offset = net.params.size();
    L.param_count = dense_params(in, out);
    L.out_size = static_cast<std::size_t>(out);
    net.params.resize(net.params.size() + L.param_count, 0.0);
    net.layers.push_back(L);
}

void add_relu(Network& net, std::size_t dim) {
    LayerDesc L;
    L.kind = LayerKind::relu;
    L.out_size = dim;
    net.layers.push_back(L);
}

void add_conv(Network& net, int in_c, int out_c, int in_h, int in_w) {
    LayerDesc L;
    L.kind = LayerKind::conv3x3;
    L.in_c = in_c;
    L.out_c = out_c;
    L.in_h = in_h;
    L.in_w = in_w;
    L.param_offset = net.params.size();
    L.param_count = conv_params(in_c, out_c);
    L.out_size = static_cast<std::size_t>(out_c) * (in_h - 2) * (in_w - 2);
    net.params.resize(net.params.size() + L.param_count, 0.0);
    net.layers.push_back(L);
}

void add_pool(Network& net, int c, int h, int w) {
    LayerDesc L;
    L.kind = LayerKind::avgpool2x2;
    L.in_c = c;
    L.in_h = h;
    L.in_w = w;
    L.out_size = static_cast<std::size_t>(c) * (h / 2) * (w / 2);
    net.layers.push_back(L);
}

// He init: weights ~ N(0, 2/fan_in), biases zero
void init_params(Network& net) {
    Rng rng(mix64(net.spec.init_seed, 0x1417u));
    for (const LayerDesc& L : net.layers) {
        if (L.param_count == 0) continue;
        int fan_in = L.kind == LayerKind::dense ? L.in_dim : L.in_c * 9;
        double std_dev = std::sqrt(2.0 / fan_in);
        std::size_t weights =
            L.kind == LayerKind::dense
                ? static_cast<std::size_t>(L.in_dim) * L.out_dim
                : static_cast<std::size_t>(L.in_c) * L.out_c * 9;
        for (std::size_t i = 0; i < weights; ++i)
            net.params[L.param_offset + i] = std_dev * rng.normal();
        // biases stay zero
    }
}

}  // namespace

int scaled_width(int base, double width_multiplier) {
    int w = static_cast<int>(std::lround(base * width_multiplier));
    return w < 1 ? 1 : w;
}

Network build_model(const ModelSpec& spec) {
    if (spec.width_multiplier <= 0.0)
        throw ValueError("build_model: width_multiplier must be positive");
    Network net;
    net.spec = spec;
    net.input_size = Tensor::size_from_shape(spec.input_shape);
    switch (spec.family) {
        case Family::mlp: {
            if (spec.input_shape.size() != 1)
                throw ShapeError("mlp expects 1-D input shape");
            int d = spec.input_shape[0];
            int h = scaled_width(kMlpBaseWidth, spec.width_multiplier);
            add_dense(net, d, h);
            add_relu(net, h);
            add_dense(net, h, h);
            add_relu(net, h);
            add_dense(net, h, spec.class_count);
            break;
        }
        case Family::smallcnn: {
            if (spec.input_shape.size() != 3)
                throw ShapeError("smallcnn expects (c,h,w) input shape");
            int c0 = spec.input_shape[0], h0 = spec.input_shape[1],
                w0 = spec.input_shape[2];
            int c = scaled_width(kCnnBaseChannels, spec.width_multiplier);
            add_conv(net, c0, c, h0, w0);
            int h1 = h0 - 2, w1 = w0 - 2;
            add_relu(net, static_cast<std::size_t>(c) * h1 * w1);
            add_pool(net, c, h1, w1);
            int h2 = h1 / 2, w2 = w1 / 2;
            add_conv(net, c, 2 * c, h2, w2);
            int h3 = h2 - 2, w3 = w2 - 2;
            add_relu(net, static_cast<std::size_t>(2 * c) * h3 * w3);
            add_pool(net, 2 * c, h3, w3);
            int h4 = h3 / 2, w4 = w3 / 2;
            add_dense(net, 2 * c * h4 * w4, spec.class_count);
            break;
        }
        default:
            throw ValueError("build_model: unsupported family");
    }
    init_params(net);
    return net;
}

std::size_t param_count(const Network& net) { return net.params.size(); }

std::size_t param_count_for(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::mlp: {
            int d = spec.input_shape.at(0);
            int h = scaled_width(kMlpBaseWidth, spec.width_multiplier);
            return dense_params(d, h) + dense_params(h, h) +
                   dense_params(h, spec.class_count);
        }
        case Family::smallcnn: {
            int c0 = spec.input_shape.at(0), h0 = spec.input_shape.at(1),
                w0 = spec.input_shape.at(2);
            int c = scaled_width(kCnnBaseChannels, spec.width_multiplier);
            int h2 = (h0 - 2) / 2, w2 = (w0 - 2) / 2;
            int h4 = (h2 - 2) / 2, w4 = (w2 - 2) / 2;
            return conv_params(c0, c) + conv_params(c, 2 * c) +
                   dense_params(2 * c * h4 * w4, spec.class_count);
        }
    }
    throw ValueError("param_count_for: unsupported family");
}

std::string family_name(Family f) {
    return f == Family::mlp ? "mlp" : "smallcnn";
}

Family family_from_name(const std::string& name) {
    if (name == "mlp") return Family::mlp;
    if (name == "smallcnn") return Family::smallcnn;
    throw ValueError("unknown model family: " + name);
}

namespace {

template <class T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CheckpointError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot open " + path);
    out.write(kCheckpointMagic, 4);
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint8_t>(net.spec.family));
    write_pod(out, net.spec.width_multiplier);
    write_pod(out, static_cast<std::uint32_t>(net.spec.input_shape.size()));
    for (int d : net.spec.input_shape)
        write_pod(out, static_cast<std::uint32_t>(d));
    write_pod(out, static_cast<std::uint32_t>(net.spec.class_count));
    write_pod(out, net.spec.init_seed);
    write_pod(out, static_cast<std::uint64_t>(net.params.size()));
    out.write(reinterpret_cast<const char*>(net.params.data()),
              static_cast<std::streamsize>(net.params.size() * sizeof(double)));
    if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    auto version = read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw CheckpointError("checkpoint: unsupported version " +
                              std::to_string(version));
    ModelSpec spec;
    spec.family = static_cast<Family>(read_pod<std::uint8_t>(in));
    spec.width_multiplier = read_pod<double>(in);
    auto ndim = read_pod<std::uint32_t>(in);
    spec.input_shape.resize(ndim);
    for (auto& d : spec.input_shape)
        d = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.class_count = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.init_seed = read_pod<std::uint64_t>(in);
    auto n_params = read_pod<std::uint64_t>(in);
    Network net = build_model(spec);
    if (net.params.size() != n_params)
        throw CheckpointError("checkpoint: parameter count mismatch");
    in.read(reinterpret_cast<char*>(net.params.data()),
            static_cast<std::streamsize>(n_params * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint: truncated parameter block");
    return net;
}

}  // namespace effdim
