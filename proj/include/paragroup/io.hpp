#pragma once

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <string>

#include "paragroup/spectral.hpp"
#include "paragroup/sphere.hpp"

namespace paragroup {

using nlohmann::json;

// SpectralFn file format: {"twice_l_max": N, "blocks": {"<2l>": [re, im, ...]}}
// with each block row-major (row = first Fourier index, ascending; column =
// second index, ascending) and interleaved re/im. Zero blocks may be omitted.
inline json to_json(const SpectralFn& f) {
    json blocks = json::object();
    for (int tw = 0; tw <= f.tw_max(); ++tw) {
        const Mat& b = f.block(tw);
        if (b.isZero(0)) continue;
        json arr = json::array();
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j) {
                arr.push_back(b(i, j).real());
                arr.push_back(b(i, j).imag());
            }
        blocks[std::to_string(tw)] = std::move(arr);
    }
    return json{{"twice_l_max", f.tw_max()}, {"blocks", std::move(blocks)}};
}

inline SpectralFn spectral_from_json(const json& j) {
    SpectralFn f(RepLabel(j.at("twice_l_max").get<int>()));
    for (const auto& [key, arr] : j.at("blocks").items()) {
        int tw = std::stoi(key);
        if (tw < 0 || tw > f.tw_max())
            throw std::invalid_argument("spectral_from_json: block key out of range");
        int d = tw + 1;
        if (int(arr.size()) != 2 * d * d)
            throw std::invalid_argument("spectral_from_json: block size mismatch");
        Mat& b = f.block(tw);
        std::size_t p = 0;
        for (int i = 0; i < d; ++i)
            for (int jj = 0; jj < d; ++jj, p += 2)
                b(i, jj) = cplx(arr[p].get<double>(), arr[p + 1].get<double>());
    }
    return f;
}

// SphFn file format: {"l_max": N, "entries": [{"n":, "m":, "re":, "im":}]}.
inline json to_json(const SphFn& f) {
    json entries = json::array();
    for (int l = 0; l <= f.l_max(); ++l)
        for (int m = -l; m <= l; ++m) {
            cplx c = f.coeff(l, m);
            if (c == cplx(0, 0)) continue;
            entries.push_back(json{{"n", l}, {"m", m}, {"re", c.real()}, {"im", c.imag()}});
        }
    return json{{"l_max", f.l_max()}, {"entries", std::move(entries)}};
}

inline SphFn sphfn_from_json(const json& j) {
    SphFn f(j.at("l_max").get<int>());
    for (const auto& e : j.at("entries")) {
        int n = e.at("n").get<int>(), m = e.at("m").get<int>();
        if (n < 0 || n > f.l_max() || std::abs(m) > n)
            throw std::invalid_argument("sphfn_from_json: index out of range");
        f.coeff(n, m) = cplx(e.at("re").get<double>(),
                             e.value("im", 0.0));
    }
    return f;
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(1) << "\n";
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

// Grid function dump: CSV with columns theta,phi,psi,re,im.
inline void save_grid_csv(const GridFn& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "theta,phi,psi,re,im\n";
    out << std::setprecision(17);
    const EulerGrid& g = *f.grid;
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j)
            for (int k = 0; k < g.n_psi(); ++k) {
                cplx v = f.at(i, j, k);
                out << g.theta(i) << ',' << g.phi(j) << ',' << g.psi(k) << ','
                    << v.real() << ',' << v.imag() << '\n';
            }
}

// Tiny deterministic CSV writer.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        out_ << std::setprecision(17);
    }
    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            out_ << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    }
    template <class... Ts>
    void row(Ts&&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ",") << vals, first = false), ...);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

}  // namespace paragroup
