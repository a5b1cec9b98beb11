#include "spikesim/container.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace spikesim {

namespace {

using json = nlohmann::ordered_json;

constexpr const char *kModelFormat = "spikesim-model";
constexpr int kModelVersion = 1;
constexpr char kInputMagic[8] = {'S', 'P', 'I', 'K', 'E', 'I', 'N', '1'};

std::vector<char> read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw LoadError("cannot open " + path.string());
    }
    std::vector<char> data((std::istreambuf_iterator<char>(in)),
            std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::filesystem::path &path, const void *data, size_t size)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw LoadError("cannot write " + path.string());
    }
    out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw LoadError("write failed for " + path.string());
    }
}

FixedTensor load_blob(const std::filesystem::path &dir, const std::string &name,
        std::vector<int> shape, FixedPointFormat fmt, int layer)
{
    if (name.empty() || name.find('/') != std::string::npos) {
        throw LoadError("layer " + std::to_string(layer) + ": bad blob reference '" + name + "'");
    }
    FixedTensor t(std::move(shape), fmt);
    std::filesystem::path path = dir / name;
    if (!std::filesystem::exists(path)) {
        throw LoadError("layer " + std::to_string(layer) + ": missing weight blob '" + name + "'");
    }
    std::vector<char> data = read_file(path);
    size_t want = static_cast<size_t>(t.element_count());
    if (data.size() < want) {
        throw LoadError("layer " + std::to_string(layer) + ": truncated weight blob '" + name +
                "' (" + std::to_string(data.size()) + " bytes, expected " +
                std::to_string(want) + ")");
    }
    if (data.size() > want) {
        throw LoadError("layer " + std::to_string(layer) + ": oversized weight blob '" + name +
                "' (" + std::to_string(data.size()) + " bytes, expected " +
                std::to_string(want) + ")");
    }
    for (size_t i = 0; i < want; ++i) {
        t.values[i] = static_cast<int8_t>(data[i]);
    }
    return t;
}

LifParams parse_lif(const json &j, int layer)
{
    LifParams p;
    p.tau_shift = j.at("tau_shift").get<int>();
    p.threshold_raw = j.at("threshold_raw").get<int32_t>();
    std::string reset = j.at("reset").get<std::string>();
    if (reset == "hard-zero") {
        p.reset = ResetMode::HardZero;
    } else if (reset == "subtract") {
        p.reset = ResetMode::Subtract;
    } else {
        throw LoadError("layer " + std::to_string(layer) + ": unknown reset mode '" + reset + "'");
    }
    if (!p.valid()) {
        throw LoadError("layer " + std::to_string(layer) + ": invalid lif parameters");
    }
    return p;
}

json lif_to_json(const LifParams &p)
{
    json j;
    j["tau_shift"] = p.tau_shift;
    j["threshold_raw"] = p.threshold_raw;
    j["reset"] = p.reset == ResetMode::HardZero ? "hard-zero" : "subtract";
    return j;
}

std::string mask_axis_name(MaskAxis axis)
{
    return axis == MaskAxis::Token ? "token" : "channel";
}

MaskAxis parse_mask_axis(const std::string &s, int layer)
{
    if (s == "token") {
        return MaskAxis::Token;
    }
    if (s == "channel") {
        return MaskAxis::Channel;
    }
    throw LoadError("layer " + std::to_string(layer) + ": unknown mask axis '" + s + "'");
}

} // namespace

ModelGraph load_model(const std::filesystem::path &dir)
{
    std::filesystem::path manifest_path = dir / "manifest.json";
    std::vector<char> raw = read_file(manifest_path);
    json manifest;
    try {
        manifest = json::parse(raw.begin(), raw.end());
    } catch (const json::parse_error &e) {
        throw LoadError("manifest parse error in " + manifest_path.string() + ": " + e.what());
    }

    try {
        if (!manifest.contains("format") || manifest["format"] != kModelFormat) {
            throw LoadError("not a spikesim model container (bad format field)");
        }
        if (manifest.at("version").get<int>() != kModelVersion) {
            throw LoadError("unsupported container version");
        }

        ModelGraph model;
        const json &quant = manifest.at("quantization");
        if (quant.at("total_bits").get<int>() != 8) {
            throw LoadError("only 8-bit quantization is supported");
        }
        model.format.frac_bits = quant.at("frac_bits").get<int>();
        if (!model.format.valid()) {
            throw LoadError("frac_bits must be in [0, 7]");
        }
        const json &input = manifest.at("input");
        model.input = {input.at("channels").get<int>(), input.at("height").get<int>(),
                input.at("width").get<int>()};

        int idx = 0;
        for (const json &jl : manifest.at("layers")) {
            LayerSpec l;
            std::string kind = jl.at("kind").get<std::string>();
            if (kind == "conv") {
                l.kind = LayerKind::Conv;
                l.in_channels = jl.at("in_channels").get<int>();
                l.out_channels = jl.at("out_channels").get<int>();
                l.kernel = jl.at("kernel").get<int>();
                l.stride = jl.at("stride").get<int>();
                l.padding = jl.at("padding").get<int>();
                l.weights = load_blob(dir, jl.at("weights").get<std::string>(),
                        {l.out_channels, l.in_channels, l.kernel, l.kernel}, model.format, idx);
            } else if (kind == "lif") {
                l.kind = LayerKind::Lif;
                l.lif = parse_lif(jl, idx);
            } else if (kind == "residual_add") {
                l.kind = LayerKind::ResidualAdd;
                l.residual_from = jl.at("from").get<int>();
            } else if (kind == "avg_pool") {
                l.kind = LayerKind::AvgPool;
                l.window = jl.at("window").get<int>();
            } else if (kind == "w2ttfs_pool") {
                l.kind = LayerKind::W2ttfsPool;
                l.window = jl.at("window").get<int>();
            } else if (kind == "qkformer") {
                l.kind = LayerKind::QkformerBlock;
                int c = jl.at("channels").get<int>();
                l.qk.q_weights = load_blob(dir, jl.at("q_weights").get<std::string>(),
                        {c, c, 1, 1}, model.format, idx);
                l.qk.k_weights = load_blob(dir, jl.at("k_weights").get<std::string>(),
                        {c, c, 1, 1}, model.format, idx);
                l.qk.q_lif = parse_lif(jl.at("q_lif"), idx);
                l.qk.k_lif = parse_lif(jl.at("k_lif"), idx);
                l.qk.residual = jl.at("residual").get<bool>();
                l.qk.mask_axis = parse_mask_axis(jl.at("mask_axis").get<std::string>(), idx);
            } else if (kind == "fully_connected") {
                l.kind = LayerKind::FullyConnected;
                l.classes = jl.at("classes").get<int>();
                l.features = jl.at("features").get<int>();
                l.weights = load_blob(dir, jl.at("weights").get<std::string>(),
                        {l.classes, l.features}, model.format, idx);
            } else {
                throw LoadError("layer " + std::to_string(idx) + ": unknown layer kind '" +
                        kind + "'");
            }
            model.layers.push_back(std::move(l));
            idx++;
        }

        model.validate();
        return model;
    } catch (const json::exception &e) {
        throw LoadError("manifest field error in " + manifest_path.string() + ": " + e.what());
    }
}

namespace {

std::string blob_name(int layer, const char *suffix)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "layer%03d%s.bin", layer, suffix);
    return buf;
}

void save_blob(const std::filesystem::path &dir, const std::string &name, const FixedTensor &t)
{
    write_file(dir / name, t.values.data(), t.values.size());
}

} // namespace

void save_model(const ModelGraph &model, const std::filesystem::path &dir)
{
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["format"] = kModelFormat;
    manifest["version"] = kModelVersion;
    manifest["quantization"] = {{"total_bits", 8}, {"frac_bits", model.format.frac_bits}};
    manifest["input"] = {{"channels", model.input.c}, {"height", model.input.h},
            {"width", model.input.w}};
    manifest["layers"] = json::array();

    for (int i = 0; i < static_cast<int>(model.layers.size()); ++i) {
        const LayerSpec &l = model.layers[i];
        json jl;
        switch (l.kind) {
        case LayerKind::Conv: {
            jl["kind"] = "conv";
            jl["in_channels"] = l.in_channels;
            jl["out_channels"] = l.out_channels;
            jl["kernel"] = l.kernel;
            jl["stride"] = l.stride;
            jl["padding"] = l.padding;
            std::string name = blob_name(i, "");
            jl["weights"] = name;
            save_blob(dir, name, l.weights);
            break;
        }
        case LayerKind::Lif:
            jl["kind"] = "lif";
            jl.update(lif_to_json(l.lif));
            break;
        case LayerKind::ResidualAdd:
            jl["kind"] = "residual_add";
            jl["from"] = l.residual_from;
            break;
        case LayerKind::AvgPool:
            jl["kind"] = "avg_pool";
            jl["window"] = l.window;
            break;
        case LayerKind::W2ttfsPool:
            jl["kind"] = "w2ttfs_pool";
            jl["window"] = l.window;
            break;
        case LayerKind::QkformerBlock: {
            jl["kind"] = "qkformer";
            jl["channels"] = l.qk.q_weights.dim(0);
            std::string qn = blob_name(i, "_q");
            std::string kn = blob_name(i, "_k");
            jl["q_weights"] = qn;
            jl["k_weights"] = kn;
            jl["q_lif"] = lif_to_json(l.qk.q_lif);
            jl["k_lif"] = lif_to_json(l.qk.k_lif);
            jl["residual"] = l.qk.residual;
            jl["mask_axis"] = mask_axis_name(l.qk.mask_axis);
            save_blob(dir, qn, l.qk.q_weights);
            save_blob(dir, kn, l.qk.k_weights);
            break;
        }
        case LayerKind::FullyConnected: {
            jl["kind"] = "fully_connected";
            jl["classes"] = l.classes;
            jl["features"] = l.features;
            std::string name = blob_name(i, "");
            jl["weights"] = name;
            save_blob(dir, name, l.weights);
            break;
        }
        }
        manifest["layers"].push_back(std::move(jl));
    }

    std::string text = manifest.dump(2) + "\n";
    write_file(dir / "manifest.json", text.data(), text.size());
}

namespace {

void put_u32(std::vector<char> &out, uint32_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32(const std::vector<char> &data, size_t pos)
{
    auto b = [&](size_t i) { return static_cast<uint32_t>(static_cast<uint8_t>(data[pos + i])); };
    return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
}

} // namespace

InputBundle load_inputs(const std::filesystem::path &file)
{
    std::vector<char> data = read_file(file);
    if (data.size() < 28 || std::memcmp(data.data(), kInputMagic, 8) != 0) {
        throw LoadError("not a spikesim input bundle (bad magic): " + file.string());
    }
    InputBundle bundle;
    uint32_t count = get_u32(data, 8);
    bundle.shape.c = static_cast<int>(get_u32(data, 12));
    bundle.shape.h = static_cast<int>(get_u32(data, 16));
    bundle.shape.w = static_cast<int>(get_u32(data, 20));
    uint32_t flags = get_u32(data, 24);
    bool has_labels = (flags & 1) != 0;
    if (bundle.shape.c <= 0 || bundle.shape.h <= 0 || bundle.shape.w <= 0) {
        throw LoadError("input bundle has a non-positive shape");
    }

    size_t bitmap_bytes = static_cast<size_t>((bundle.shape.count() + 7) / 8);
    size_t want = 28 + bitmap_bytes * count + (has_labels ? 2 * count : 0);
    if (data.size() < want) {
        throw LoadError("truncated input bundle: " + file.string());
    }
    if (data.size() > want) {
        throw LoadError("trailing bytes in input bundle: " + file.string());
    }

    size_t pos = 28;
    for (uint32_t i = 0; i < count; ++i) {
        SpikeTensor img(bundle.shape.c, bundle.shape.h, bundle.shape.w);
        for (int64_t bit = 0; bit < bundle.shape.count(); ++bit) {
            uint8_t byte = static_cast<uint8_t>(data[pos + bit / 8]);
            if ((byte >> (bit % 8)) & 1) {
                int c = static_cast<int>(bit / (bundle.shape.h * bundle.shape.w));
                int rem = static_cast<int>(bit % (bundle.shape.h * bundle.shape.w));
                img.set(c, rem / bundle.shape.w, rem % bundle.shape.w, true);
            }
        }
        bundle.images.push_back(std::move(img));
        pos += bitmap_bytes;
    }
    if (has_labels) {
        for (uint32_t i = 0; i < count; ++i) {
            uint16_t v = static_cast<uint8_t>(data[pos]) |
                    (static_cast<uint16_t>(static_cast<uint8_t>(data[pos + 1])) << 8);
            bundle.labels.push_back(v);
            pos += 2;
        }
    }
    return bundle;
}

void save_inputs(const InputBundle &bundle, const std::filesystem::path &file)
{
    SPIKESIM_REQUIRE(bundle.labels.empty() || bundle.labels.size() == bundle.images.size(),
            "label count must match image count");
    std::vector<char> out;
    out.insert(out.end(), kInputMagic, kInputMagic + 8);
    put_u32(out, static_cast<uint32_t>(bundle.images.size()));
    put_u32(out, static_cast<uint32_t>(bundle.shape.c));
    put_u32(out, static_cast<uint32_t>(bundle.shape.h));
    put_u32(out, static_cast<uint32_t>(bundle.shape.w));
    put_u32(out, bundle.has_labels() ? 1 : 0);

    size_t bitmap_bytes = static_cast<size_t>((bundle.shape.count() + 7) / 8);
    for (const SpikeTensor &img : bundle.images) {
        SPIKESIM_REQUIRE(img.channels == bundle.shape.c && img.height == bundle.shape.h &&
                        img.width == bundle.shape.w,
                "image shape does not match the bundle");
        std::vector<uint8_t> bytes(bitmap_bytes, 0);
        for (int c = 0; c < img.channels; ++c) {
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    if (img.get(c, y, x)) {
                        int64_t bit = (static_cast<int64_t>(c) * img.height + y) * img.width + x;
                        bytes[bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
                    }
                }
            }
        }
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    for (int label : bundle.labels) {
        SPIKESIM_REQUIRE(label >= 0 && label <= 0xffff, "label out of range");
        out.push_back(static_cast<char>(label & 0xff));
        out.push_back(static_cast<char>((label >> 8) & 0xff));
    }
    write_file(file, out.data(), out.size());
}

} // namespace spikesim
