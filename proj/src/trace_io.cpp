#include "stochfire/trace_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "stochfire/errors.hpp"

namespace stochfire {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;
    const std::string& origin;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) {
            throw FormatError(origin + ": truncated (need " + std::to_string(n) +
                              " bytes at offset " + std::to_string(pos) + ")");
        }
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = bytes[pos] | (std::uint16_t(bytes[pos + 1]) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    void magic(const char* expect) {
        need(4);
        if (std::memcmp(bytes.data() + pos, expect, 4) != 0) {
            throw FormatError(origin + ": bad magic, expected \"" + expect + "\"");
        }
        pos += 4;
    }
};

std::uint32_t scaled_u32(double v, double scale, const char* what) {
    const double s = std::round(v * scale);
    if (!(s >= 0.0) || s > 4294967295.0) {
        throw InputError(std::string(what) + " out of range for the file header");
    }
    return static_cast<std::uint32_t>(s);
}

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return fnv1a64(bytes.data(), bytes.size());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw InputError("failed reading " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing " + path.string());
}

std::vector<std::uint8_t> encode_trace(const SimulationTrace& trace) {
    if (trace.frames.empty()) throw InputError("cannot encode an empty trace");
    const SimConfig& c = trace.config;
    const auto H = static_cast<std::uint32_t>(trace.frames[0].rows);
    const auto W = static_cast<std::uint32_t>(trace.frames[0].cols);
    const auto T = static_cast<std::uint32_t>(trace.frames.size());

    std::vector<std::uint8_t> out;
    out.reserve(74 + static_cast<std::size_t>(T) * H * W);
    out.insert(out.end(), {'F', 'F', 'C', 'A'});
    put_u16(out, kFfcaVersion);
    put_u32(out, H);
    put_u32(out, W);
    put_u32(out, T);
    put_u32(out, scaled_u32(c.s_level, 100.0, "s_level"));
    put_u32(out, scaled_u32(c.density, 1e6, "density"));
    put_u64(out, c.master_seed);
    put_u32(out, trace.sim_index);
    put_u32(out, scaled_u32(c.alpha, 1e6, "alpha"));
    put_f64(out, c.q_threshold);
    put_f64(out, c.i_seed);
    put_f64(out, c.q_die);
    put_f64(out, c.q_dead);
    for (const GridFrame& f : trace.frames) {
        if (f.rows != static_cast<int>(H) || f.cols != static_cast<int>(W)) {
            throw InternalError("trace frames disagree on grid shape");
        }
        for (CellState s : f.states) out.push_back(static_cast<std::uint8_t>(s));
    }
    return out;
}

SimulationTrace decode_trace(const std::vector<std::uint8_t>& bytes,
                             const std::string& origin) {
    Reader r{bytes, 0, origin};
    r.magic("FFCA");
    const std::uint16_t version = r.u16();
    if (version != kFfcaVersion) {
        throw FormatError(origin + ": unsupported trace version " + std::to_string(version));
    }
    const std::uint32_t H = r.u32();
    const std::uint32_t W = r.u32();
    const std::uint32_t T = r.u32();
    if (H == 0 || W == 0 || T == 0) throw FormatError(origin + ": degenerate dimensions");

    SimulationTrace trace;
    trace.config.rows = static_cast<int>(H);
    trace.config.cols = static_cast<int>(W);
    trace.config.s_level = r.u32() / 100.0;
    trace.config.density = r.u32() / 1e6;
    trace.config.master_seed = r.u64();
    trace.sim_index = r.u32();
    trace.config.alpha = r.u32() / 1e6;
    trace.config.q_threshold = r.f64();
    trace.config.i_seed = r.f64();
    trace.config.q_die = r.f64();
    trace.config.q_dead = r.f64();
    trace.config.max_steps = static_cast<int>(T);

    const std::size_t cells = static_cast<std::size_t>(H) * W;
    r.need(static_cast<std::size_t>(T) * cells);
    trace.frames.reserve(T);
    for (std::uint32_t t = 0; t < T; ++t) {
        GridFrame f;
        f.rows = static_cast<int>(H);
        f.cols = static_cast<int>(W);
        f.t = static_cast<int>(t);
        f.states.resize(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            const std::uint8_t b = bytes[r.pos++];
            if (b > 4) {
                throw FormatError(origin + ": invalid state byte " + std::to_string(b));
            }
            f.states[i] = static_cast<CellState>(b);
        }
        trace.frames.push_back(std::move(f));
    }
    if (r.pos != bytes.size()) throw FormatError(origin + ": trailing bytes");
    return trace;
}

void write_trace(const std::filesystem::path& path, const SimulationTrace& trace) {
    write_file_bytes(path, encode_trace(trace));
}

SimulationTrace read_trace(const std::filesystem::path& path) {
    return decode_trace(read_file_bytes(path), path.string());
}

std::vector<std::uint8_t> encode_stat_map(const MicroStatMap& map) {
    std::vector<std::uint8_t> out;
    out.reserve(18 + map.values.size() * 4);
    out.insert(out.end(), {'F', 'F', 'S', 'T'});
    put_u16(out, kFfstVersion);
    put_u32(out, static_cast<std::uint32_t>(map.rows));
    put_u32(out, static_cast<std::uint32_t>(map.cols));
    put_u32(out, static_cast<std::uint32_t>(map.horizon));
    if (map.values.size() !=
        static_cast<std::size_t>(map.horizon) * map.rows * map.cols) {
        throw InternalError("stat map value count disagrees with its dimensions");
    }
    for (double v : map.values) put_f32(out, static_cast<float>(v));
    return out;
}

MicroStatMap decode_stat_map(const std::vector<std::uint8_t>& bytes,
                             const std::string& origin) {
    Reader r{bytes, 0, origin};
    r.magic("FFST");
    const std::uint16_t version = r.u16();
    if (version != kFfstVersion) {
        throw FormatError(origin + ": unsupported map version " + std::to_string(version));
    }
    MicroStatMap map;
    map.rows = static_cast<int>(r.u32());
    map.cols = static_cast<int>(r.u32());
    map.horizon = static_cast<int>(r.u32());
    if (map.rows <= 0 || map.cols <= 0 || map.horizon <= 0) {
        throw FormatError(origin + ": degenerate dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(map.horizon) * map.rows * map.cols;
    r.need(n * 4);
    map.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) map.values[i] = r.f32();
    if (r.pos != bytes.size()) throw FormatError(origin + ": trailing bytes");
    return map;
}

void write_stat_map(const std::filesystem::path& path, const MicroStatMap& map) {
    write_file_bytes(path, encode_stat_map(map));
}

MicroStatMap read_stat_map(const std::filesystem::path& path) {
    return decode_stat_map(read_file_bytes(path), path.string());
}

void write_forecast(const std::filesystem::path& path, const ForecastMap& forecast) {
    MicroStatMap map;
    map.horizon = forecast.horizon;
    map.rows = forecast.rows;
    map.cols = forecast.cols;
    map.values = forecast.values;
    write_stat_map(path, map);
}

ForecastMap read_forecast(const std::filesystem::path& path) {
    const MicroStatMap map = read_stat_map(path);
    ForecastMap f;
    f.kind = "file";
    f.horizon = map.horizon;
    f.rows = map.rows;
    f.cols = map.cols;
    f.values = map.values;
    return f;
}

std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw InputError(dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ffca") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace stochfire
