#include "phtori/persistence.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "phtori/errors.hpp"

namespace phtori {

static_assert(std::endian::native == std::endian::little, "record payload assumes a little-endian host");

namespace {

constexpr const char* kMagic = "PHTORI-RECORD";
constexpr int kScalarCount = 9;
constexpr int kObservableCount = 17;

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::vector<double> observable_values(const ObservableRecord& o) {
    return {o.T, o.omega, o.h, o.unstable_multiplier, o.floquet_exponent, o.c1, o.c2, o.r1, o.r2,
            o.distances.tangent_field, o.distances.stable_unstable, o.distances.stable_center,
            o.distances.unstable_center, o.frequencies.omega_p, o.frequencies.omega_v, o.frequencies.nu_p,
            o.frequencies.nu_v};
}

const char* const kObservableNames[kObservableCount] = {
    "T", "omega", "h", "unstable_multiplier", "floquet_exponent", "c1", "c2", "r1", "r2",
    "d_tangent_field", "d_stable_unstable", "d_stable_center", "d_unstable_center",
    "omega_p", "omega_v", "nu_p", "nu_v"};

ObservableRecord observables_from(const double* v, int N, int m) {
    ObservableRecord o;
    o.T = v[0];
    o.omega = v[1];
    o.h = v[2];
    o.unstable_multiplier = v[3];
    o.floquet_exponent = v[4];
    o.c1 = v[5];
    o.c2 = v[6];
    o.r1 = v[7];
    o.r2 = v[8];
    o.distances = {v[9], v[10], v[11], v[12]};
    o.frequencies = {v[13], v[14], v[15], v[16]};
    o.N = N;
    o.m = m;
    return o;
}

std::string single_token(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos)
        throw ConfigError(std::string(what) + " must be a nonempty token without whitespace");
    return s;
}

int to_int(const std::string& s, const std::string& key) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("bad integer for '" + key + "': " + s);
    return v;
}

}  // namespace

std::string TorusRecord::id() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return buf;
}

void write_record(std::ostream& os, const TorusRecord& r) {
    const TorusState& s = r.state;
    s.validate();
    const int N = s.N(), m = s.m, d = s.dim();
    std::ostringstream txt;
    txt << kMagic << ' ' << r.schema << '\n';
    txt << "family " << single_token(r.family, "family") << '\n';
    txt << "index " << r.index << '\n';
    txt << "parent " << r.parent << '\n';
    txt << "tag " << single_token(r.tag, "tag") << '\n';
    txt << "n " << s.n << '\n' << "m " << m << '\n' << "N " << N << '\n';
    txt << "generator " << to_string(s.generator) << '\n';
    txt << "bundle " << to_string(s.bundle) << '\n';
    const double scalars[kScalarCount] = {s.omega, s.T, s.lambda, s.h, s.err, s.err_w, r.alpha_used, r.alpha_next, r.mu};
    const char* names[kScalarCount] = {"omega", "T", "lambda", "h", "err", "err_w", "alpha_used", "alpha_next", "mu"};
    for (int k = 0; k < kScalarCount; ++k) txt << names[k] << ' ' << fmt17(scalars[k]) << '\n';
    txt << "observables " << (r.observables ? 1 : 0) << '\n';
    std::vector<double> payload(scalars, scalars + kScalarCount);
    if (r.observables) {
        const auto ov = observable_values(*r.observables);
        for (int k = 0; k < kObservableCount; ++k) txt << "obs." << kObservableNames[k] << ' ' << fmt17(ov[k]) << '\n';
        payload.insert(payload.end(), ov.begin(), ov.end());
    }
    auto put_legs = [&](const std::vector<CurveMap>& legs, char label) {
        for (int i = 0; i < m; ++i) {
            const Mat smp = legs[i].samples();
            txt << label << ' ' << i << '\n';
            for (int j = 0; j < N; ++j) {
                for (int c = 0; c < d; ++c) {
                    txt << (c ? " " : "") << fmt17(smp(j, c));
                    payload.push_back(smp(j, c));
                }
                txt << '\n';
            }
        }
    };
    put_legs(s.K, 'K');
    put_legs(s.W, 'W');
    const std::size_t nbytes = payload.size() * sizeof(double);
    txt << "BINARY " << nbytes << '\n';
    std::string body = txt.str();
    const std::size_t off = body.size();
    body.resize(off + nbytes);
    std::memcpy(body.data() + off, payload.data(), nbytes);
    body += '\n';
    const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
    char tail[32];
    std::snprintf(tail, sizeof tail, "CHECKSUM %08lx\n", static_cast<unsigned long>(crc));
    body += tail;
    os.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!os) throw IoError("failed to write record");
}

TorusRecord read_record(std::istream& is) {
    std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (all.rfind(kMagic, 0) != 0) throw IoError("not a torus record");
    const std::size_t cpos = all.rfind("\nCHECKSUM ");
    if (cpos == std::string::npos) throw IoError("truncated record (no checksum line)");
    const std::string cline = all.substr(cpos + 10);
    unsigned long stored = 0;
    if (cline.size() < 9 || std::sscanf(cline.c_str(), "%8lx", &stored) != 1)
        throw IoError("truncated record (bad checksum line)");
    const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(all.data()), static_cast<uInt>(cpos + 1));
    if (crc != stored) throw ChecksumError("record checksum mismatch");

    // Header lines up to BINARY.
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    std::size_t nbytes = 0;
    int schema = -1;
    int k_rows = 0;
    bool found_binary = false;
    while (pos < cpos) {
        const std::size_t eol = all.find('\n', pos);
        if (eol == std::string::npos) throw IoError("truncated record header");
        const std::string line = all.substr(pos, eol - pos);
        pos = eol + 1;
        const std::size_t sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == kMagic) {
            schema = to_int(val, key);
            if (schema != kRecordSchema)
                throw IoError("unsupported record schema " + val + " (expected " + std::to_string(kRecordSchema) + ")");
        } else if (key == "BINARY") {
            nbytes = static_cast<std::size_t>(std::stoull(val));
            found_binary = true;
            break;
        } else if (key == "K" || key == "W") {
            continue;
        } else if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                                    key == "nan" || key == "inf")) {
            ++k_rows;
        } else {
            kv[key] = val;
        }
    }
    if (!found_binary) throw IoError("record has no binary section");
    if (pos + nbytes + 1 != cpos + 1) throw IoError("truncated record (binary section size mismatch)");

    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError("record lacks field '" + key + "'");
        return it->second;
    };
    TorusRecord r;
    r.schema = schema;
    r.family = need("family");
    r.index = to_int(need("index"), "index");
    r.parent = to_int(need("parent"), "parent");
    r.tag = need("tag");
    TorusState& s = r.state;
    s.n = to_int(need("n"), "n");
    s.m = to_int(need("m"), "m");
    const int N = to_int(need("N"), "N");
    s.generator = parse_generator(need("generator"));
    s.bundle = parse_bundle(need("bundle"));
    const bool has_obs = to_int(need("observables"), "observables") != 0;
    if (s.n < 1 || s.m < 1 || N < 1) throw IoError("record has invalid sizes");
    const std::size_t d = 2 * static_cast<std::size_t>(s.n);
    const std::size_t samples = static_cast<std::size_t>(s.m) * N * d;
    const std::size_t count = kScalarCount + (has_obs ? kObservableCount : 0) + 2 * samples;
    if (nbytes != count * sizeof(double)) throw IoError("record sample count does not match header");
    if (k_rows != 2 * s.m * N) throw IoError("record text rows do not match header");

    std::vector<double> v(count);
    std::memcpy(v.data(), all.data() + pos, nbytes);
    s.omega = v[0];
    s.T = v[1];
    s.lambda = v[2];
    s.h = v[3];
    s.err = v[4];
    s.err_w = v[5];
    r.alpha_used = v[6];
    r.alpha_next = v[7];
    r.mu = v[8];
    std::size_t at = kScalarCount;
    if (has_obs) {
        r.observables = observables_from(v.data() + at, N, s.m);
        at += kObservableCount;
    }
    auto get_legs = [&](std::vector<CurveMap>& legs) {
        legs.clear();
        for (int i = 0; i < s.m; ++i) {
            Mat smp(N, static_cast<Eigen::Index>(d));
            for (int j = 0; j < N; ++j)
                for (std::size_t c = 0; c < d; ++c) smp(j, static_cast<Eigen::Index>(c)) = v[at++];
            legs.push_back(CurveMap::from_samples(smp));
        }
    };
    get_legs(s.K);
    get_legs(s.W);
    s.validate();
    return r;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

void write_record(const TorusRecord& record, const std::filesystem::path& path) {
    std::ostringstream os(std::ios::binary);
    write_record(os, record);
    write_file_atomic(path, os.str());
}

TorusRecord read_record(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open record " + path.string());
    try {
        return read_record(f);
    } catch (const ChecksumError& e) {
        throw ChecksumError(path.string() + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::filesystem::path record_path(const std::filesystem::path& dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "torus_%06d.rec", index);
    return dir / buf;
}

std::vector<IndexEntry> family_index(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<IndexEntry> out;
    std::string family;
    for (const auto& ent : std::filesystem::directory_iterator(dir)) {
        if (!ent.is_regular_file() || ent.path().extension() != ".rec") continue;
        const TorusRecord r = read_record(ent.path());
        if (out.empty())
            family = r.family;
        else if (r.family != family)
            throw IoError("mixed-family directory: '" + family + "' and '" + r.family + "'");
        IndexEntry e;
        e.index = r.index;
        e.file = ent.path().filename().string();
        e.h = r.state.h;
        e.T = r.state.T;
        e.omega = r.state.omega;
        e.unstable_multiplier = r.observables ? r.observables->unstable_multiplier : unstable_multiplier(r.state);
        e.c1 = r.observables ? r.observables->c1 : std::numeric_limits<double>::quiet_NaN();
        e.c2 = r.observables ? r.observables->c2 : std::numeric_limits<double>::quiet_NaN();
        e.N = r.state.N();
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const IndexEntry& a, const IndexEntry& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < out.size(); ++k)
        if (out[k].index == out[k - 1].index) throw IoError("duplicate index " + std::to_string(out[k].index));
    return out;
}

void write_index(std::ostream& os, const std::vector<IndexEntry>& entries) {
    os << "id\th\tT\tomega\tLambda_u\tC1\tC2\tN\n";
    os << std::setprecision(17);
    for (const auto& e : entries)
        os << e.index << '\t' << e.h << '\t' << e.T << '\t' << e.omega << '\t' << e.unstable_multiplier << '\t'
           << e.c1 << '\t' << e.c2 << '\t' << e.N << '\n';
}

std::vector<IndexEntry> update_index(const std::filesystem::path& dir) {
    auto entries = family_index(dir);
    std::ostringstream os;
    write_index(os, entries);
    write_file_atomic(dir / "index.tsv", os.str());
    return entries;
}

}  // namespace phtori
