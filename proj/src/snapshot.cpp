#include "drheo/snapshot.hpp"

#include <cstring>
#include <fstream>

namespace drheo {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) fail(error_kind::io, "snapshot truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

double get_f64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) fail(error_kind::io, "snapshot truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

std::string snapshot_bytes(const spectral_velocity& v) {
    const std::size_t npts = v.grid.points();
    std::string out;
    out.reserve(4 + 4 + 4 + 4 + 8 + npts * static_cast<std::size_t>(v.grid.d) * 16);
    out += "DRHE";
    put_u32(out, snapshot_format_version);
    put_u32(out, static_cast<std::uint32_t>(v.grid.d));
    put_u32(out, static_cast<std::uint32_t>(v.grid.n));
    put_f64(out, v.time);
    for (std::size_t idx = 0; idx < npts; ++idx)
        for (int a = 0; a < v.grid.d; ++a) {
            const std::complex<double>& z = v.c[static_cast<std::size_t>(a) * npts + idx];
            put_f64(out, z.real());
            put_f64(out, z.imag());
        }
    return out;
}

void write_snapshot(const spectral_velocity& v, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot open " + path);
    std::string bytes = snapshot_bytes(v);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(error_kind::io, "short write to " + path);
}

spectral_velocity snapshot_from_bytes(const std::string& in, double dealias_fraction) {
    std::size_t pos = 0;
    if (in.size() < 4 || in.compare(0, 4, "DRHE") != 0)
        fail(error_kind::io, "snapshot: bad magic");
    pos = 4;
    std::uint32_t version = get_u32(in, pos);
    if (version != snapshot_format_version)
        fail(error_kind::io, "snapshot: unsupported format version " + std::to_string(version));
    std::uint32_t d = get_u32(in, pos);
    std::uint32_t n = get_u32(in, pos);
    double time = get_f64(in, pos);
    if (d != 2 && d != 3) fail(error_kind::io, "snapshot: bad dimension");
    torus_grid g(static_cast<int>(d), static_cast<int>(n), dealias_fraction);
    spectral_velocity v(g);
    v.time = time;
    const std::size_t npts = g.points();
    if (in.size() - pos != npts * d * 16) fail(error_kind::io, "snapshot: payload size mismatch");
    for (std::size_t idx = 0; idx < npts; ++idx)
        for (std::uint32_t a = 0; a < d; ++a) {
            double re = get_f64(in, pos);
            double im = get_f64(in, pos);
            v.c[static_cast<std::size_t>(a) * npts + idx] = {re, im};
        }
    return v;
}

spectral_velocity read_snapshot(const std::string& path, double dealias_fraction) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return snapshot_from_bytes(bytes, dealias_fraction);
}

} // namespace drheo
