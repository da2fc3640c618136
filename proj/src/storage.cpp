#include "tubelet/storage.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tubelet/error.hpp"

namespace tubelet {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f64(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
}

class Reader {
public:
    Reader(std::string data, std::string path)
        : data_(std::move(data)), path_(std::move(path)) {}

    void expect_magic(const char* magic) {
        if (data_.size() < pos_ + 4) {
            throw TruncatedPayloadError(path_ + ": file too short for magic");
        }
        if (std::memcmp(data_.data() + pos_, magic, 4) != 0) {
            throw BadMagicError(path_ + ": bad magic, expected " + magic);
        }
        pos_ += 4;
    }

    std::uint16_t u16() {
        need(2, "header");
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) {
            v |= static_cast<std::uint16_t>(byte(pos_ + i)) << (8 * i);
        }
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        need(4, "header");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8, "payload");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
        }
        pos_ += 8;
        return std::bit_cast<double>(v);
    }

    void read_bytes(std::uint8_t* dst, std::size_t n) {
        need(n, "payload");
        std::memcpy(dst, data_.data() + pos_, n);
        pos_ += n;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    const std::string& path() const { return path_; }

    void need(std::size_t n, const char* what) const {
        if (data_.size() < pos_ + n) {
            throw TruncatedPayloadError(path_ + ": truncated " + what);
        }
    }

private:
    std::uint8_t byte(std::size_t i) const {
        return static_cast<std::uint8_t>(data_[i]);
    }

    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void spew(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

}  // namespace

void write_clip(const Clip& clip, const std::filesystem::path& path) {
    std::string out;
    out.reserve(18 + clip.pixels.size());
    out.append("TBC1");
    put_u16(out, kClipFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(clip.frames));
    put_u32(out, static_cast<std::uint32_t>(clip.height));
    put_u32(out, static_cast<std::uint32_t>(clip.width));
    out.append(reinterpret_cast<const char*>(clip.pixels.data()), clip.pixels.size());
    spew(path, out);
}

Clip read_clip(const std::filesystem::path& path) {
    Reader r(slurp(path), path.string());
    r.expect_magic("TBC1");
    const std::uint16_t version = r.u16();
    if (version != kClipFormatVersion) {
        throw VersionMismatchError(path.string() + ": clip format version " +
                                   std::to_string(version) + ", expected " +
                                   std::to_string(kClipFormatVersion));
    }
    const std::uint32_t t = r.u32();
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    if (t == 0 || h == 0 || w == 0 || static_cast<std::uint64_t>(t) * h * w > (1u << 30)) {
        throw FormatError(path.string() + ": implausible clip dimensions");
    }
    const std::size_t payload = static_cast<std::size_t>(t) * h * w * 3;
    if (r.remaining() < payload) {
        throw TruncatedPayloadError(path.string() + ": payload shorter than declared");
    }
    if (r.remaining() > payload) {
        throw FormatError(path.string() + ": trailing bytes after payload");
    }
    Clip clip(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
    r.read_bytes(clip.pixels.data(), payload);
    return clip;
}

void write_checkpoint(const EncoderParams& params, const std::filesystem::path& path) {
    std::string out;
    out.append("TBCK");
    put_u16(out, kCheckpointFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(params.config.grid_t));
    put_u32(out, static_cast<std::uint32_t>(params.config.grid_h));
    put_u32(out, static_cast<std::uint32_t>(params.config.grid_w));
    put_u32(out, static_cast<std::uint32_t>(params.config.hidden));
    put_u32(out, static_cast<std::uint32_t>(params.config.embed));
    for (int l = 0; l < params.layer_count(); ++l) {
        for (double v : params.weights[l].a) {
            put_f64(out, v);
        }
        for (double v : params.biases[l]) {
            put_f64(out, v);
        }
    }
    spew(path, out);
}

EncoderParams read_checkpoint(const std::filesystem::path& path) {
    Reader r(slurp(path), path.string());
    r.expect_magic("TBCK");
    const std::uint16_t version = r.u16();
    if (version != kCheckpointFormatVersion) {
        throw VersionMismatchError(path.string() + ": checkpoint format version " +
                                   std::to_string(version) + ", expected " +
                                   std::to_string(kCheckpointFormatVersion));
    }
    EncoderConfig config;
    config.grid_t = static_cast<int>(r.u32());
    config.grid_h = static_cast<int>(r.u32());
    config.grid_w = static_cast<int>(r.u32());
    config.hidden = static_cast<int>(r.u32());
    config.embed = static_cast<int>(r.u32());
    if (config.grid_t < 1 || config.grid_h < 1 || config.grid_w < 1 ||
        config.hidden < 1 || config.embed < 1 ||
        static_cast<std::uint64_t>(config.input_dim()) > (1u << 24)) {
        throw FormatError(path.string() + ": implausible architecture dimensions");
    }
    EncoderParams params;
    params.config = config;
    const int dims[5] = {config.input_dim(), config.hidden, config.hidden,
                         config.hidden, config.embed};
    for (int l = 0; l < 4; ++l) {
        Matrix w(dims[l + 1], dims[l]);
        for (double& v : w.a) {
            v = r.f64();
        }
        std::vector<double> b(dims[l + 1]);
        for (double& v : b) {
            v = r.f64();
        }
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    if (r.remaining() != 0) {
        throw FormatError(path.string() + ": trailing bytes after parameters");
    }
    return params;
}

void write_corpus_manifest(const std::vector<CorpusEntry>& entries,
                           const std::filesystem::path& path) {
    std::string out;
    for (const CorpusEntry& e : entries) {
        nlohmann::json record = {
            {"id", e.id},
            {"path", e.path},
            {"kind", to_string(e.kind)},
            {"seed", e.seed},
            {"shape", {e.frames, e.height, e.width}},
        };
        out += record.dump();
        out += '\n';
    }
    spew(path, out);
}

std::vector<CorpusEntry> read_corpus_manifest(const std::filesystem::path& path) {
    const std::string data = slurp(path);
    std::vector<CorpusEntry> entries;
    std::set<std::string> ids;
    std::istringstream lines(data);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": manifest parse error: " + e.what());
        }
        CorpusEntry entry;
        try {
            entry.id = record.at("id").get<std::string>();
            entry.path = record.at("path").get<std::string>();
            entry.kind = clip_kind_from_string(record.at("kind").get<std::string>());
            entry.seed = record.at("seed").get<std::uint64_t>();
            const auto shape = record.at("shape");
            entry.frames = shape.at(0).get<int>();
            entry.height = shape.at(1).get<int>();
            entry.width = shape.at(2).get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": bad manifest record: " + e.what());
        }
        if (!ids.insert(entry.id).second) {
            throw FormatError(path.string() + ": duplicate manifest id " + entry.id);
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<Clip> load_corpus(const std::filesystem::path& manifest_path) {
    const std::vector<CorpusEntry> entries = read_corpus_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();
    std::vector<Clip> clips;
    clips.reserve(entries.size());
    for (const CorpusEntry& e : entries) {
        clips.push_back(read_clip(base / e.path));
    }
    return clips;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path) {
    std::string out = "epoch,mean_loss,learning_rate\n";
    char buf[96];
    for (const EpochStats& s : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", s.epoch, s.mean_loss,
                      s.learning_rate);
        out += buf;
    }
    spew(path, out);
}

void write_ppm(const std::vector<std::uint8_t>& rgb, int width, int height,
               const std::filesystem::path& path) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw InvalidInputError("write_ppm: buffer size mismatch");
    }
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    spew(path, out);
}

std::vector<std::array<std::uint8_t, 3>> plot_palette() {
    return {
        {{204, 41, 41}},   // red
        {{41, 81, 204}},   // blue
        {{34, 153, 66}},   // green
        {{229, 143, 20}},  // orange
        {{140, 46, 188}},  // purple
        {{20, 158, 158}},  // teal
    };
}

namespace {

void put_pixel(std::vector<std::uint8_t>& rgb, int width, int height, int x, int y,
               const std::array<std::uint8_t, 3>& color) {
    if (x < 0 || x >= width || y < 0 || y >= height) {
        return;
    }
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = color[0];
    rgb[i + 1] = color[1];
    rgb[i + 2] = color[2];
}

void draw_line(std::vector<std::uint8_t>& rgb, int width, int height, int x0, int y0,
               int x1, int y1, const std::array<std::uint8_t, 3>& color) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put_pixel(rgb, width, height, x0, y0, color);
        if (x0 == x1 && y0 == y1) {
            break;
        }
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_marker(std::vector<std::uint8_t>& rgb, int width, int height, int cx, int cy,
                 int radius, const std::array<std::uint8_t, 3>& color) {
    for (int y = cy - radius; y <= cy + radius; ++y) {
        for (int x = cx - radius; x <= cx + radius; ++x) {
            put_pixel(rgb, width, height, x, y, color);
        }
    }
}

}  // namespace

void render_trajectory_plot(const std::vector<Trajectory>& trajectories, int width,
                            int height, const std::filesystem::path& path) {
    if (trajectories.empty()) {
        throw InvalidInputError("render_trajectory_plot: no trajectories");
    }
    if (width < 1 || height < 1) {
        throw InvalidConfigError("render_trajectory_plot: invalid frame size");
    }
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 255);
    const auto palette = plot_palette();
    const std::array<std::uint8_t, 3> end_color = {{0, 0, 0}};
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& color = palette[i % palette.size()];
        const auto& centers = trajectories[i].centers;
        if (centers.empty()) {
            continue;
        }
        auto px = [&](const Vec2& v) {
            return std::pair<int, int>{
                std::clamp(static_cast<int>(std::lround(v.x)), 0, width - 1),
                std::clamp(static_cast<int>(std::lround(v.y)), 0, height - 1)};
        };
        for (std::size_t j = 0; j + 1 < centers.size(); ++j) {
            const auto [x0, y0] = px(centers[j]);
            const auto [x1, y1] = px(centers[j + 1]);
            draw_line(rgb, width, height, x0, y0, x1, y1, color);
        }
        const auto [sx, sy] = px(centers.front());
        const auto [ex, ey] = px(centers.back());
        draw_marker(rgb, width, height, sx, sy, 1, color);
        draw_marker(rgb, width, height, ex, ey, 1, end_color);
    }
    write_ppm(rgb, width, height, path);
}

void render_mask_strip(const RenderedTubelet& tubelet,
                       const std::filesystem::path& path) {
    if (tubelet.frames.empty()) {
        throw InvalidInputError("render_mask_strip: empty tubelet");
    }
    int cell_w = 1;
    int cell_h = 1;
    for (const RenderedFrame& f : tubelet.frames) {
        cell_w = std::max(cell_w, f.warped.width);
        cell_h = std::max(cell_h, f.warped.height);
    }
    const int pad = 2;
    const int width = static_cast<int>(tubelet.frames.size()) * (cell_w + pad) + pad;
    const int height = cell_h + 2 * pad;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 255);
    for (std::size_t i = 0; i < tubelet.frames.size(); ++i) {
        const Patch& p = tubelet.frames[i].warped;
        const int ox = pad + static_cast<int>(i) * (cell_w + pad) + (cell_w - p.width) / 2;
        const int oy = pad + (cell_h - p.height) / 2;
        for (int y = 0; y < p.height; ++y) {
            for (int x = 0; x < p.width; ++x) {
                const float m = p.mask[p.mask_index(y, x)];
                const auto v = static_cast<std::uint8_t>(
                    std::clamp(std::lround(255.0 * (1.0 - m)), 0L, 255L));
                put_pixel(rgb, width, height, ox + x, oy + y, {{v, v, v}});
            }
        }
    }
    write_ppm(rgb, width, height, path);
}

}  // namespace tubelet
