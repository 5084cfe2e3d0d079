#include "bsim/trajfile.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bsim::trajfile {

static_assert(std::endian::native == std::endian::little,
              "trajectory files are little-endian; byte-swapping not implemented");

namespace {
constexpr char magic[5] = {'B', 'S', 'I', 'M', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("trajfile: truncated file");
    return v;
}
} // namespace

void write(const std::filesystem::path& path, const sde::TrajectorySeries& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("trajfile: cannot open " + path.string());
    out.write(magic, sizeof(magic));
    put<std::uint8_t>(out, traj.kind == sde::TrajectoryKind::envelope ? 1 : 0);
    const std::uint32_t channels = traj.kind == sde::TrajectoryKind::envelope ? 2 : 1;
    put(out, channels);
    put(out, traj.dt);
    put(out, traj.t0);
    put<std::uint64_t>(out, traj.metadata.size());
    out.write(traj.metadata.data(), static_cast<std::streamsize>(traj.metadata.size()));
    put<std::uint64_t>(out, traj.ch1.size());
    out.write(reinterpret_cast<const char*>(traj.ch1.data()),
              static_cast<std::streamsize>(traj.ch1.size() * sizeof(double)));
    if (channels == 2)
        out.write(reinterpret_cast<const char*>(traj.ch2.data()),
                  static_cast<std::streamsize>(traj.ch2.size() * sizeof(double)));
    if (!out) throw std::runtime_error("trajfile: write failed for " + path.string());
}

sde::TrajectorySeries read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("trajfile: cannot open " + path.string());
    char m[5];
    in.read(m, 5);
    if (!in || std::memcmp(m, magic, 5) != 0)
        throw std::runtime_error("trajfile: bad magic in " + path.string());

    sde::TrajectorySeries t;
    const auto kind = get<std::uint8_t>(in);
    t.kind = kind == 1 ? sde::TrajectoryKind::envelope : sde::TrajectoryKind::full;
    const auto channels = get<std::uint32_t>(in);
    if (channels != (kind == 1 ? 2u : 1u))
        throw std::runtime_error("trajfile: channel count inconsistent with kind");
    t.dt = get<double>(in);
    t.t0 = get<double>(in);
    const auto meta_len = get<std::uint64_t>(in);
    t.metadata.resize(meta_len);
    in.read(t.metadata.data(), static_cast<std::streamsize>(meta_len));
    const auto count = get<std::uint64_t>(in);
    t.ch1.resize(count);
    in.read(reinterpret_cast<char*>(t.ch1.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (channels == 2) {
        t.ch2.resize(count);
        in.read(reinterpret_cast<char*>(t.ch2.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    }
    if (!in) throw std::runtime_error("trajfile: truncated data in " + path.string());
    return t;
}

} // namespace bsim::trajfile
