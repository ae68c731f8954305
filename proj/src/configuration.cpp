#include "zrp/configuration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace zrp {

Configuration::Configuration(TorusLattice l, double c) : lattice(l), chi(c), counts(static_cast<std::size_t>(l.site_count()), 0) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("chi must be positive");
    if (l.site_count() > kMaxSites) throw std::invalid_argument("lattice exceeds the site cap");
}

Configuration::Configuration(TorusLattice l, double c, std::vector<std::uint32_t> k) : Configuration(l, c) {
    if (k.size() != counts.size()) throw std::invalid_argument("count vector length mismatch");
    counts = std::move(k);
}

std::vector<double> Configuration::field() const {
    std::vector<double> f(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) f[i] = chi * counts[i];
    return f;
}

std::uint64_t Configuration::particle_count() const {
    std::uint64_t s = 0;
    for (auto k : counts) s += k;
    return s;
}

double total_mass(const Configuration& eta) {
    return static_cast<double>(eta.particle_count()) * (eta.chi / static_cast<double>(eta.lattice.site_count()));
}

static int window_radius(double eps, int N) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("local average requires eps > 0");
    return static_cast<int>(std::floor(eps * N));
}

double local_average(const Configuration& eta, double eps, Site x) {
    const auto& L = eta.lattice;
    int r = window_radius(eps, L.side());
    int side = 2 * r + 1;
    auto c = L.coords(x);
    std::vector<int> off(L.dim(), -r), cc(L.dim());
    double sum = 0.0;
    while (true) {
        for (int i = 0; i < L.dim(); ++i) cc[i] = c[i] + off[i];
        sum += eta.counts[static_cast<std::size_t>(L.index(cc))];
        int i = L.dim() - 1;
        while (i >= 0 && ++off[i] > r) off[i--] = -r;
        if (i < 0) break;
    }
    return eta.chi * sum / std::pow(static_cast<double>(side), L.dim());
}

std::vector<double> local_average_field(const Configuration& eta, double eps) {
    const auto& L = eta.lattice;
    const int N = L.side();
    int r = window_radius(eps, N);
    long long side = 2LL * r + 1;
    long long full = side / N, rem = side % N;
    std::vector<double> cur(eta.counts.begin(), eta.counts.end()), next(cur.size());
    std::vector<double> line(N), prefix(2 * N + 1);
    for (int axis = 0; axis < L.dim(); ++axis) {
        for (Site x = 0; x < L.site_count(); ++x) {
            if (L.coord(x, axis) != 0) continue;
            for (int t = 0; t < N; ++t) line[t] = cur[static_cast<std::size_t>(L.shift(x, axis, t))];
            prefix[0] = 0.0;
            for (int t = 0; t < 2 * N; ++t) prefix[t + 1] = prefix[t] + line[t % N];
            double total = prefix[N];
            for (int t = 0; t < N; ++t) {
                int s = static_cast<int>(((t - r) % N + N) % N);
                double v = static_cast<double>(full) * total + (prefix[s + rem] - prefix[s]);
                next[static_cast<std::size_t>(L.shift(x, axis, t))] = v;
            }
        }
        std::swap(cur, next);
    }
    double norm = eta.chi / std::pow(static_cast<double>(side), L.dim());
    for (auto& v : cur) v *= norm;
    return cur;
}

double entropy_density(double u) { return u > 0.0 ? u * std::log(u) : 0.0; }

double entropy(const Configuration& eta) {
    double s = 0.0;
    for (auto k : eta.counts) s += entropy_density(eta.chi * k);
    return s / static_cast<double>(eta.lattice.site_count());
}

Symmetry Symmetry::identity(int d) {
    Symmetry g;
    g.permutation.resize(d);
    std::iota(g.permutation.begin(), g.permutation.end(), 0);
    g.signs.assign(d, 1);
    g.translation.assign(d, 0);
    return g;
}

Symmetry Symmetry::translate(std::vector<int> t) {
    Symmetry g = identity(static_cast<int>(t.size()));
    g.translation = std::move(t);
    return g;
}

void Symmetry::validate(int d) const {
    if (static_cast<int>(permutation.size()) != d || static_cast<int>(signs.size()) != d ||
        static_cast<int>(translation.size()) != d)
        throw std::invalid_argument("symmetry dimension mismatch");
    std::vector<int> p = permutation;
    std::sort(p.begin(), p.end());
    for (int i = 0; i < d; ++i)
        if (p[i] != i) throw std::invalid_argument("symmetry axis map is not a permutation");
    for (int s : signs)
        if (s != 1 && s != -1) throw std::invalid_argument("symmetry signs must be +-1");
}

Site Symmetry::apply(const TorusLattice& L, Site x) const {
    auto c = L.coords(x);
    std::vector<int> out(L.dim());
    for (int i = 0; i < L.dim(); ++i) out[i] = signs[i] * c[permutation[i]] + translation[i];
    return L.index(out);
}

Symmetry Symmetry::compose(const Symmetry& o, int N) const {
    int d = static_cast<int>(permutation.size());
    Symmetry g;
    g.permutation.resize(d);
    g.signs.resize(d);
    g.translation.resize(d);
    for (int i = 0; i < d; ++i) {
        int j = permutation[i];
        g.permutation[i] = o.permutation[j];
        g.signs[i] = signs[i] * o.signs[j];
        g.translation[i] = ((signs[i] * o.translation[j] + translation[i]) % N + N) % N;
    }
    return g;
}

std::vector<Symmetry> symmetry_group(const TorusLattice& L) {
    const int d = L.dim();
    std::vector<Symmetry> out;
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        for (int mask = 0; mask < (1 << d); ++mask) {
            for (Site t = 0; t < L.site_count(); ++t) {
                Symmetry g;
                g.permutation = perm;
                g.signs.resize(d);
                for (int i = 0; i < d; ++i) g.signs[i] = (mask >> i) & 1 ? -1 : 1;
                g.translation = L.coords(t);
                out.push_back(g);
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

Configuration apply_symmetry(const Configuration& eta, const Symmetry& g) {
    g.validate(eta.lattice.dim());
    Configuration out(eta.lattice, eta.chi);
    for (Site x = 0; x < eta.lattice.site_count(); ++x)
        out.counts[static_cast<std::size_t>(g.apply(eta.lattice, x))] = eta.counts[static_cast<std::size_t>(x)];
    return out;
}

namespace {

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw std::runtime_error("snapshot truncated");
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, buf.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
}

void header(std::vector<unsigned char>& buf, const TorusLattice& L, double chi, SnapshotPayload kind) {
    buf.insert(buf.end(), {'Z', 'R', 'P', 'S'});
    put<std::uint32_t>(buf, kSnapshotVersion);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(L.dim()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(L.side()));
    put<double>(buf, chi);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(kind));
}

struct Header {
    TorusLattice lattice;
    double chi;
    SnapshotPayload kind;
};

Header read_header(const std::vector<unsigned char>& buf, std::size_t& pos) {
    if (buf.size() < 4 || std::memcmp(buf.data(), "ZRPS", 4) != 0) throw std::runtime_error("not a snapshot");
    pos = 4;
    if (get<std::uint32_t>(buf, pos) != kSnapshotVersion) throw std::runtime_error("unsupported snapshot version");
    int d = static_cast<int>(get<std::uint32_t>(buf, pos));
    int N = static_cast<int>(get<std::uint32_t>(buf, pos));
    double chi = get<double>(buf, pos);
    auto kind = static_cast<SnapshotPayload>(get<std::uint32_t>(buf, pos));
    return {TorusLattice(d, N), chi, kind};
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const Configuration& eta) {
    std::vector<unsigned char> buf;
    header(buf, eta.lattice, eta.chi, SnapshotPayload::Counts);
    for (auto k : eta.counts) put<std::uint32_t>(buf, k);
    return buf;
}

std::vector<unsigned char> encode_field_snapshot(const TorusLattice& L, double chi, const std::vector<double>& values) {
    std::vector<unsigned char> buf;
    header(buf, L, chi, SnapshotPayload::Doubles);
    for (double v : values) put<double>(buf, v);
    return buf;
}

Configuration decode_snapshot(const std::vector<unsigned char>& bytes) {
    std::size_t pos = 0;
    auto h = read_header(bytes, pos);
    if (h.kind != SnapshotPayload::Counts) throw std::runtime_error("snapshot holds a real field, not counts");
    Configuration eta(h.lattice, h.chi);
    for (auto& k : eta.counts) k = get<std::uint32_t>(bytes, pos);
    return eta;
}

std::vector<double> decode_field_snapshot(const std::vector<unsigned char>& bytes, TorusLattice* lattice) {
    std::size_t pos = 0;
    auto h = read_header(bytes, pos);
    if (h.kind != SnapshotPayload::Doubles) throw std::runtime_error("snapshot holds counts, not a real field");
    std::vector<double> out(static_cast<std::size_t>(h.lattice.site_count()));
    for (auto& v : out) v = get<double>(bytes, pos);
    if (lattice) *lattice = h.lattice;
    return out;
}

void write_snapshot(const std::string& path, const Configuration& eta, const std::string& sidecar_json) {
    auto bytes = encode_snapshot(eta);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::ofstream side(path + ".json");
    side << sidecar_json << "\n";
}

Configuration read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

}  // namespace zrp
