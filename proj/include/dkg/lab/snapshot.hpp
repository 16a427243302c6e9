#pragma once

// Binary snapshots.
//
// Layout:
//   64 bytes   "DKGSNAP\0", uint32 LE version, zero padding
//   one line   JSON metadata terminated by '\n'
//   payload    arrays as little-endian float64, in the order listed in metadata["arrays"]
//   8 bytes    FNV-1a 64 checksum (LE) of everything before it
//
// Complex fields are stored as interleaved (re, im) pairs.

#include "dkg/errors.hpp"
#include "dkg/manybody.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dkg::lab {

inline constexpr std::array<char, 8> snapshot_magic{'D', 'K', 'G', 'S', 'N', 'A', 'P', '\0'};
inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr std::size_t snapshot_header_size = 64;

class SnapshotError : public std::runtime_error {
public:
    enum class Kind { malformed_header, dimension_mismatch, checksum, io };
    SnapshotError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct Snapshot {
    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::pair<std::string, std::vector<double>>> arrays;

    const std::vector<double>& array(const std::string& name) const {
        for (const auto& [n, v] : arrays)
            if (n == name) return v;
        throw SnapshotError(SnapshotError::Kind::dimension_mismatch, "snapshot has no array '" + name + "'");
    }
};

namespace detail {

inline std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
void put_le(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.append(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const char* p) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

inline std::vector<double> pack(const Field& f) {
    std::vector<double> out;
    out.reserve(2 * f.size());
    for (const auto& v : f.values()) {
        out.push_back(v.real());
        out.push_back(v.imag());
    }
    return out;
}

inline Field unpack(const TorusGrid& g, const std::vector<double>& v, std::size_t offset = 0) {
    if (v.size() < offset + 2 * g.size())
        throw SnapshotError(SnapshotError::Kind::dimension_mismatch, "array too short for the grid");
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = complex(v[offset + 2 * i], v[offset + 2 * i + 1]);
    return f;
}

inline std::vector<double> pack(const SpinorField& psi) {
    std::vector<double> out;
    for (int c = 0; c < 4; ++c) {
        auto p = pack(psi[c]);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

inline SpinorField unpack_spinor(const TorusGrid& g, const std::vector<double>& v) {
    if (v.size() != 8 * g.size())
        throw SnapshotError(SnapshotError::Kind::dimension_mismatch, "spinor array does not match the grid");
    return SpinorField(unpack(g, v, 0), unpack(g, v, 2 * g.size()), unpack(g, v, 4 * g.size()),
                       unpack(g, v, 6 * g.size()));
}

inline void require_size(const std::vector<double>& v, std::size_t n, const std::string& name) {
    if (v.size() != n)
        throw SnapshotError(SnapshotError::Kind::dimension_mismatch, "array '" + name + "' has the wrong length");
}

}  // namespace detail

inline std::string encode_snapshot(const Snapshot& snap) {
    nlohmann::json meta = snap.meta;
    meta["arrays"] = nlohmann::json::array();
    for (const auto& [name, v] : snap.arrays) meta["arrays"].push_back({{"name", name}, {"count", v.size()}});

    std::string out;
    out.append(snapshot_magic.data(), snapshot_magic.size());
    detail::put_le(out, snapshot_version);
    out.resize(snapshot_header_size, '\0');
    out += meta.dump();
    out += '\n';
    for (const auto& [name, v] : snap.arrays)
        for (double x : v) detail::put_le(out, x);
    detail::put_le(out, detail::fnv1a(out.data(), out.size()));
    return out;
}

inline Snapshot decode_snapshot(const std::string& bytes) {
    using K = SnapshotError::Kind;
    if (bytes.size() < snapshot_magic.size() ||
        std::memcmp(bytes.data(), snapshot_magic.data(), snapshot_magic.size()) != 0)
        throw SnapshotError(K::malformed_header, "not a snapshot file (bad magic)");
    if (bytes.size() < snapshot_header_size + 8) throw SnapshotError(K::checksum, "snapshot is truncated");
    const std::size_t body = bytes.size() - 8;
    if (detail::fnv1a(bytes.data(), body) != detail::get_le<std::uint64_t>(bytes.data() + body))
        throw SnapshotError(K::checksum, "snapshot checksum mismatch");
    if (detail::get_le<std::uint32_t>(bytes.data() + snapshot_magic.size()) != snapshot_version)
        throw SnapshotError(K::malformed_header, "unsupported snapshot version");

    const auto nl = bytes.find('\n', snapshot_header_size);
    if (nl == std::string::npos || nl >= body) throw SnapshotError(K::malformed_header, "missing metadata line");
    Snapshot snap;
    try {
        snap.meta = nlohmann::json::parse(bytes.substr(snapshot_header_size, nl - snapshot_header_size));
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(K::malformed_header, std::string("bad metadata: ") + e.what());
    }
    if (!snap.meta.is_object() || !snap.meta.contains("arrays") || !snap.meta["arrays"].is_array())
        throw SnapshotError(K::malformed_header, "metadata lacks an array list");

    std::size_t pos = nl + 1;
    for (const auto& a : snap.meta["arrays"]) {
        const auto name = a.at("name").get<std::string>();
        const auto count = a.at("count").get<std::size_t>();
        if (count > (body - pos) / 8) throw SnapshotError(K::dimension_mismatch, "array '" + name + "' overruns the file");
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) v[i] = detail::get_le<double>(bytes.data() + pos + 8 * i);
        pos += 8 * count;
        snap.arrays.emplace_back(name, std::move(v));
    }
    if (pos != body) throw SnapshotError(K::dimension_mismatch, "payload length does not match the array list");
    snap.meta.erase("arrays");
    return snap;
}

inline void write_snapshot(const Snapshot& snap, const std::string& path) {
    const std::string bytes = encode_snapshot(snap);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError(SnapshotError::Kind::io, "cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError(SnapshotError::Kind::io, "write to '" + path + "' failed");
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError(SnapshotError::Kind::io, "cannot open '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

namespace detail {

inline nlohmann::json grid_meta(const TorusGrid& g) {
    return {{"dim", g.dim()}, {"points", g.points()}, {"length", g.length()}};
}

inline TorusGrid grid_from_meta(const nlohmann::json& m) {
    try {
        const auto& g = m.at("grid");
        return TorusGrid(g.at("dim").get<int>(), g.at("points").get<int>(), g.at("length").get<double>());
    } catch (const std::exception& e) {
        throw SnapshotError(SnapshotError::Kind::malformed_header, std::string("bad grid metadata: ") + e.what());
    }
}

inline nlohmann::json couplings_meta(const Couplings& c) {
    return {{"gamma_sigma", c.gamma_sigma}, {"gamma_omega", c.gamma_omega}, {"fermion_mass", c.fermion_mass}};
}

inline Couplings couplings_from_meta(const nlohmann::json& m) {
    const auto& c = m.at("couplings");
    return Couplings{c.at("gamma_sigma").get<double>(), c.at("gamma_omega").get<double>(),
                     c.at("fermion_mass").get<double>()};
}

inline void add_kg(Snapshot& s, const KGState& kg) {
    s.meta["masses"] = {{"m_sigma", kg.m_sigma}, {"m_omega", kg.m_omega}};
    s.arrays.emplace_back("kg.s", pack(kg.s));
    s.arrays.emplace_back("kg.s_dot", pack(kg.s_dot));
    for (int mu = 0; mu < 4; ++mu) {
        s.arrays.emplace_back("kg.omega." + std::to_string(mu), pack(kg.omega[static_cast<std::size_t>(mu)]));
        s.arrays.emplace_back("kg.omega_dot." + std::to_string(mu), pack(kg.omega_dot[static_cast<std::size_t>(mu)]));
    }
}

inline KGState read_kg(const Snapshot& s, const TorusGrid& g) {
    const auto& m = s.meta.at("masses");
    KGState kg(g, m.at("m_sigma").get<double>(), m.at("m_omega").get<double>());
    auto field = [&](const std::string& name) {
        const auto& v = s.array(name);
        require_size(v, 2 * g.size(), name);
        return unpack(g, v);
    };
    kg.s = field("kg.s");
    kg.s_dot = field("kg.s_dot");
    for (int mu = 0; mu < 4; ++mu) {
        kg.omega[static_cast<std::size_t>(mu)] = field("kg.omega." + std::to_string(mu));
        kg.omega_dot[static_cast<std::size_t>(mu)] = field("kg.omega_dot." + std::to_string(mu));
    }
    return kg;
}

inline Snapshot base_snapshot(const std::string& kind, const TorusGrid& g, const Couplings& c, double t) {
    Snapshot s;
    s.meta["kind"] = kind;
    s.meta["grid"] = grid_meta(g);
    s.meta["couplings"] = couplings_meta(c);
    s.meta["time"] = t;
    return s;
}

inline void require_kind(const Snapshot& s, const std::string& kind) {
    if (!s.meta.contains("kind") || s.meta["kind"] != kind)
        throw SnapshotError(SnapshotError::Kind::malformed_header, "snapshot does not hold a '" + kind + "' state");
}

inline void add_gamma(Snapshot& s, const DensityMatrix& gamma) {
    s.meta["rank"] = gamma.rank();
    s.arrays.emplace_back("occupations", gamma.occupations);
    for (std::size_t k = 0; k < gamma.rank(); ++k) s.arrays.emplace_back("orbital." + std::to_string(k), pack(gamma.orbitals[k]));
}

inline DensityMatrix read_gamma(const Snapshot& s, const TorusGrid& g) {
    const auto rank = s.meta.at("rank").get<std::size_t>();
    const auto& n = s.array("occupations");
    require_size(n, rank, "occupations");
    std::vector<SpinorField> orbitals;
    for (std::size_t k = 0; k < rank; ++k) orbitals.push_back(unpack_spinor(g, s.array("orbital." + std::to_string(k))));
    return DensityMatrix(std::move(orbitals), n);
}

}  // namespace detail

inline Snapshot to_snapshot(const DKGSystemState& st) {
    Snapshot s = detail::base_snapshot("dkg", st.psi.grid(), st.c, st.t);
    s.arrays.emplace_back("psi", detail::pack(st.psi));
    detail::add_kg(s, st.kg);
    return s;
}

inline Snapshot to_snapshot(const NLDState& st) {
    Snapshot s = detail::base_snapshot("nld", st.psi.grid(), st.c, st.t);
    s.arrays.emplace_back("psi", detail::pack(st.psi));
    return s;
}

inline Snapshot to_snapshot(const ManyBodyDKGState& st) {
    Snapshot s = detail::base_snapshot("dkg-mb", st.gamma.grid(), st.c, st.t);
    detail::add_gamma(s, st.gamma);
    detail::add_kg(s, st.kg);
    return s;
}

inline Snapshot to_snapshot(const ManyBodyNLDState& st) {
    Snapshot s = detail::base_snapshot("nld-mb", st.gamma.grid(), st.c, st.t);
    detail::add_gamma(s, st.gamma);
    return s;
}

template <typename State>
State from_snapshot(const Snapshot& s);

template <>
inline DKGSystemState from_snapshot<DKGSystemState>(const Snapshot& s) {
    detail::require_kind(s, "dkg");
    const TorusGrid g = detail::grid_from_meta(s.meta);
    return DKGSystemState{detail::unpack_spinor(g, s.array("psi")), detail::read_kg(s, g), detail::couplings_from_meta(s.meta),
                          s.meta.at("time").get<double>()};
}

template <>
inline NLDState from_snapshot<NLDState>(const Snapshot& s) {
    detail::require_kind(s, "nld");
    const TorusGrid g = detail::grid_from_meta(s.meta);
    return NLDState{detail::unpack_spinor(g, s.array("psi")), detail::couplings_from_meta(s.meta),
                    s.meta.at("time").get<double>()};
}

template <>
inline ManyBodyDKGState from_snapshot<ManyBodyDKGState>(const Snapshot& s) {
    detail::require_kind(s, "dkg-mb");
    const TorusGrid g = detail::grid_from_meta(s.meta);
    return ManyBodyDKGState{detail::read_gamma(s, g), detail::read_kg(s, g), detail::couplings_from_meta(s.meta),
                            s.meta.at("time").get<double>()};
}

template <>
inline ManyBodyNLDState from_snapshot<ManyBodyNLDState>(const Snapshot& s) {
    detail::require_kind(s, "nld-mb");
    const TorusGrid g = detail::grid_from_meta(s.meta);
    return ManyBodyNLDState{detail::read_gamma(s, g), detail::couplings_from_meta(s.meta), s.meta.at("time").get<double>()};
}

template <typename State>
void snapshot_save(const State& state, const std::string& path, const nlohmann::json& extra = nlohmann::json::object()) {
    Snapshot s = to_snapshot(state);
    if (!extra.empty()) s.meta["extra"] = extra;
    write_snapshot(s, path);
}

template <typename State>
State snapshot_load(const std::string& path) {
    return from_snapshot<State>(read_snapshot(path));
}

}  // namespace dkg::lab
