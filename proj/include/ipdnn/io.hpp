#pragma once

// File formats: measurement CSV (tx,rx,re,im), permittivity CSV
// (i,j,re,im), setup JSON, PGM/PBM rendering. Parsers are strict and
// report the offending line.

#include "ipdnn/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ipdnn {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& path, int line)
{
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error(path + ":" + std::to_string(line) + ": bad numeric field '" + s + "'");
    }
}

inline long parse_long(const std::string& s, const std::string& path, int line)
{
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error(path + ":" + std::to_string(line) + ": bad integer field '" + s + "'");
    }
}

} // namespace detail

// ---- measurements: CSV header tx,rx,re,im, row-major over tx then rx ----

inline void save_measurements(const std::string& path, const MeasurementSet& m)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "tx,rx,re,im\n";
    f.precision(17);
    for (int t = 0; t < m.n_tx(); ++t)
        for (int r = 0; r < m.n_rx(); ++r)
            f << t << ',' << r << ',' << m.samples(r, t).real() << ',' << m.samples(r, t).imag()
              << '\n';
    if (!f) throw std::runtime_error("short write on " + path);
}

inline MeasurementSet load_measurements(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open " + path);
    std::string line;
    int ln = 0;
    if (!std::getline(f, line)) throw parse_error(path + ":1: empty file");
    ++ln;
    {
        auto fields = detail::split_csv_line(line);
        if (fields != std::vector<std::string>{"tx", "rx", "re", "im"})
            throw parse_error(path + ":1: expected header 'tx,rx,re,im'");
    }
    struct Row {
        int t, r;
        cplx v;
    };
    std::vector<Row> rows;
    int max_t = -1, max_r = -1;
    while (std::getline(f, line)) {
        ++ln;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 4)
            throw parse_error(path + ":" + std::to_string(ln) + ": expected 4 fields");
        const int t = static_cast<int>(detail::parse_long(fields[0], path, ln));
        const int r = static_cast<int>(detail::parse_long(fields[1], path, ln));
        if (t < 0 || r < 0) throw parse_error(path + ":" + std::to_string(ln) + ": negative index");
        rows.push_back({t, r,
                        {detail::parse_double(fields[2], path, ln),
                         detail::parse_double(fields[3], path, ln)}});
        max_t = std::max(max_t, t);
        max_r = std::max(max_r, r);
    }
    if (rows.empty()) throw parse_error(path + ":" + std::to_string(ln) + ": no data rows");
    const int T = max_t + 1, M = max_r + 1;
    if (static_cast<long>(rows.size()) != static_cast<long>(T) * M)
        throw parse_error(path + ":" + std::to_string(ln) + ": incomplete tx/rx grid (" +
                          std::to_string(rows.size()) + " rows for " + std::to_string(T) + "x" +
                          std::to_string(M) + ")");
    MeasurementSet m;
    m.samples.setZero(M, T);
    m.provenance = "file";
    for (const auto& row : rows) m.samples(row.r, row.t) = row.v;
    return m;
}

// ---- permittivity: CSV header i,j,re,im over grid indices ----

inline void save_permittivity(const std::string& path, const PermittivityMap& eps)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "i,j,re,im\n";
    f.precision(17);
    const int n = eps.n_side();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f << i << ',' << j << ',' << eps.values(i, j).real() << ','
              << eps.values(i, j).imag() << '\n';
    if (!f) throw std::runtime_error("short write on " + path);
}

inline PermittivityMap load_permittivity(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open " + path);
    std::string line;
    int ln = 0;
    if (!std::getline(f, line)) throw parse_error(path + ":1: empty file");
    ++ln;
    {
        auto fields = detail::split_csv_line(line);
        if (fields != std::vector<std::string>{"i", "j", "re", "im"})
            throw parse_error(path + ":1: expected header 'i,j,re,im'");
    }
    struct Row {
        int i, j;
        cplx v;
    };
    std::vector<Row> rows;
    int max_i = -1, max_j = -1;
    while (std::getline(f, line)) {
        ++ln;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 4)
            throw parse_error(path + ":" + std::to_string(ln) + ": expected 4 fields");
        const int i = static_cast<int>(detail::parse_long(fields[0], path, ln));
        const int j = static_cast<int>(detail::parse_long(fields[1], path, ln));
        if (i < 0 || j < 0) throw parse_error(path + ":" + std::to_string(ln) + ": negative index");
        rows.push_back({i, j,
                        {detail::parse_double(fields[2], path, ln),
                         detail::parse_double(fields[3], path, ln)}});
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
    }
    const int n = std::max(max_i, max_j) + 1;
    if (static_cast<long>(rows.size()) != static_cast<long>(n) * n)
        throw parse_error(path + ":" + std::to_string(ln) + ": incomplete or non-square grid");
    PermittivityMap eps(n);
    for (const auto& row : rows) eps.values(row.i, row.j) = row.v;
    return eps;
}

// ---- setup JSON ----

inline nlohmann::json setup_to_json(const Setup& s)
{
    nlohmann::json j;
    j["version"] = 1;
    j["frequency_hz"] = s.frequency;
    j["doi_side_m"] = s.doi_side;
    j["n_side"] = s.n_side;
    auto pts = [](const std::vector<Eigen::Vector2d>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& p : v) a.push_back({p.x(), p.y()});
        return a;
    };
    j["tx_positions"] = pts(s.tx_positions);
    j["rx_positions"] = pts(s.rx_positions);
    return j;
}

inline Setup setup_from_json(const nlohmann::json& j)
{
    Setup s;
    s.frequency = j.at("frequency_hz").get<double>();
    s.doi_side = j.at("doi_side_m").get<double>();
    s.n_side = j.at("n_side").get<int>();
    auto pts = [](const nlohmann::json& a) {
        std::vector<Eigen::Vector2d> v;
        for (const auto& p : a) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        return v;
    };
    s.tx_positions = pts(j.at("tx_positions"));
    s.rx_positions = pts(j.at("rx_positions"));
    s.validate();
    return s;
}

inline void save_setup(const std::string& path, const Setup& s)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << setup_to_json(s).dump(2) << '\n';
}

inline Setup load_setup(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    try {
        return setup_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// ---- image rendering ----

// Grayscale PGM of one channel, linear min->max, plus a sidecar text file
// recording the scale.
inline void render_map(const PermittivityMap& eps, const std::string& path,
                       const std::string& channel = "re")
{
    if (channel != "re" && channel != "im")
        throw std::invalid_argument("render_map: channel must be 're' or 'im'");
    const int n = eps.n_side();
    Eigen::MatrixXd x =
        channel == "re" ? Eigen::MatrixXd(eps.values.real()) : Eigen::MatrixXd(eps.values.imag());
    const double lo = x.minCoeff(), hi = x.maxCoeff();
    const double span = hi - lo;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "P2\n" << n << ' ' << n << "\n255\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int v = span > 0.0 ? static_cast<int>(std::lround(255.0 * (x(i, j) - lo) / span))
                                     : 0;
            f << v << (j + 1 == n ? '\n' : ' ');
        }
    }
    std::ofstream side(path + ".txt");
    side.precision(17);
    side << "channel " << channel << "\nmin " << lo << "\nmax " << hi << '\n';
}

inline void render_mask(const BinaryMask& mask, const std::string& path)
{
    const int n = mask.n_side();
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "P1\n" << n << ' ' << n << '\n';
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f << (mask.bits(i, j) ? 1 : 0) << (j + 1 == n ? '\n' : ' ');
}

} // namespace ipdnn
