#include "ksreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ksreg {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: identical bytes on every platform
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

void write_trajectory_csv(const std::filesystem::path& path, const PairSystem& system,
                          const Trajectory& traj) {
    auto out = open_out(path);
    out << "s,t";
    for (int i = 0; i < system.body_count(); ++i)
        out << ",q" << i << "x,q" << i << "y,q" << i << "z,v" << i << "x,v" << i << "y,v" << i
            << "z";
    out << "\n";
    for (std::size_t c = 0; c < traj.size(); ++c) {
        const RegState st = system.unpack(traj.states[c]);
        const CartesianState cart = system.reconstruct(st);
        out << format_g17(traj.s[c]) << ',' << format_g17(st.t);
        for (int i = 0; i < system.body_count(); ++i) {
            const Vec3& q = cart.positions[static_cast<std::size_t>(i)];
            const Vec3& v = cart.velocities[static_cast<std::size_t>(i)];
            out << ',' << format_g17(q.x) << ',' << format_g17(q.y) << ',' << format_g17(q.z)
                << ',' << format_g17(v.x) << ',' << format_g17(v.y) << ',' << format_g17(v.z);
        }
        out << "\n";
    }
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<DriftSample>& drift) {
    auto out = open_out(path);
    out << "t,drift\n";
    for (const auto& d : drift) out << format_g17(d.t) << ',' << format_g17(d.drift) << "\n";
}

void write_ksep_csv(const std::filesystem::path& path, const KsepSeries& series) {
    auto out = open_out(path);
    out << "s,t,dK\n";
    for (const auto& smp : series.samples)
        out << format_g17(smp.s) << ',' << format_g17(smp.t) << ',' << format_g17(smp.d) << "\n";
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<KsepResult>& results) {
    auto out = open_out(path);
    out << "eps,s,t,dK\n";
    for (const auto& res : results)
        for (const auto& smp : res.series.samples)
            out << format_g17(res.series.tolerance) << ',' << format_g17(smp.s) << ','
                << format_g17(smp.t) << ',' << format_g17(smp.d) << "\n";
}

void write_poincare_csv(const std::filesystem::path& path, const PoincareResult& result) {
    auto out = open_out(path);
    out << "n,s,t,u1,u2,u3,u4,dist_prev\n";
    for (const auto& c : result.crossings)
        out << c.n << ',' << format_g17(c.s) << ',' << format_g17(c.t) << ','
            << format_g17(c.generator.u1) << ',' << format_g17(c.generator.u2) << ','
            << format_g17(c.generator.u3) << ',' << format_g17(c.generator.u4) << ','
            << format_g17(c.dist_prev) << "\n";
}

void write_fiber_csv(const std::filesystem::path& path, const std::vector<Fiber>& fibers,
                     int n_samples) {
    auto out = open_out(path);
    out << "theta,u1,u2,u3,u4,px,py,pz\n";
    for (const auto& fib : fibers) {
        for (int k = 0; k < n_samples; ++k) {
            const double vartheta = fib.branch_sign * (2.0 * M_PI * k / n_samples);
            const KSVec w = fiber_rotate(fib.generator, vartheta);
            Vec3 p;
            bool at_pole = false;
            try {
                p = stereographic_project(w, 4);
            } catch (const ProjectionError&) {
                at_pole = true;
            }
            out << format_g17(vartheta) << ',' << format_g17(w.u1) << ',' << format_g17(w.u2)
                << ',' << format_g17(w.u3) << ',' << format_g17(w.u4);
            if (at_pole)
                out << ",nan,nan,nan\n";
            else
                out << ',' << format_g17(p.x) << ',' << format_g17(p.y) << ',' << format_g17(p.z)
                    << "\n";
        }
    }
}

std::string simulate_summary_json(const ScenarioFile& scenario, const SimulationResult& result) {
    json j;
    j["scenario"] = scenario.name;
    j["tolerance"] = result.tolerance;
    j["theta_ref_deg"] = result.theta_ref * 180.0 / M_PI;
    j["vartheta_deg"] = result.vartheta * 180.0 / M_PI;
    j["E0"] = result.initial_energy;
    j["energy_drift_final"] = result.final_drift;
    j["t_final"] = result.trajectory.size() ? result.trajectory.time_at(result.trajectory.size() - 1)
                                            : 0.0;
    j["s_final"] = result.trajectory.size() ? result.trajectory.s.back() : 0.0;
    j["t_esc"] = optional_json(result.t_esc);
    j["consistency_defect_max"] = result.consistency_max;
    j["bilinear_defect_max"] = result.bilinear_max;
    j["checkpoints"] = result.trajectory.size();
    return j.dump(2) + "\n";
}

std::string ksep_summary_json(const ScenarioFile& scenario, const KsepResult& result) {
    json j;
    j["scenario"] = scenario.name;
    j["tolerance"] = result.series.tolerance;
    j["theta_ref_deg"] = result.series.theta_ref * 180.0 / M_PI;
    j["vartheta_deg"] = result.series.vartheta * 180.0 / M_PI;
    if (result.fit) {
        j["gamma_t"] = result.fit->gamma_t;
        j["gamma_s"] = result.fit->gamma_s;
        j["fit_residual"] = result.fit->residual;
        j["fit_samples"] = result.fit->n_samples;
    } else {
        j["gamma_t"] = nullptr;
        j["gamma_s"] = nullptr;
    }
    j["t_cr_measured"] = optional_json(result.series.t_cr);
    j["t_cr_predicted"] = optional_json(result.t_cr_predicted);
    j["t_esc"] = optional_json(result.series.t_esc);
    j["E0"] = result.reference.initial_energy;
    j["energy_drift_final"] = result.reference.final_drift;
    return j.dump(2) + "\n";
}

std::string sweep_summary_json(const ScenarioFile& scenario,
                               const std::vector<KsepResult>& results) {
    json rows = json::array();
    for (const auto& res : results) {
        json row;
        row["tolerance"] = res.series.tolerance;
        row["gamma_t"] = res.fit ? json(res.fit->gamma_t) : json(nullptr);
        row["t_cr_measured"] = optional_json(res.series.t_cr);
        row["t_cr_predicted"] = optional_json(res.t_cr_predicted);
        row["energy_drift_final"] = res.reference.final_drift;
        rows.push_back(row);
    }
    json j;
    j["scenario"] = scenario.name;
    j["runs"] = rows;
    return j.dump(2) + "\n";
}

namespace {

struct Rect {
    double x0, x1, y0, y1;
};

std::string svg_header(int w, int h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
       << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

const char* kStrokes[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string ksep_svg(const std::vector<const KsepSeries*>& series,
                     const std::vector<std::string>& labels) {
    const int W = 720, H = 480, ML = 70, MR = 20, MT = 20, MB = 50;
    Rect data{1e300, -1e300, 1e300, -1e300};
    for (const auto* s : series) {
        for (const auto& p : s->samples) {
            if (p.d <= 0.0) continue;
            data.x0 = std::min(data.x0, p.t);
            data.x1 = std::max(data.x1, p.t);
            data.y0 = std::min(data.y0, std::log10(p.d));
            data.y1 = std::max(data.y1, std::log10(p.d));
        }
    }
    if (data.x0 >= data.x1) {
        data.x0 = 0;
        data.x1 = 1;
    }
    if (data.y0 >= data.y1) {
        data.y0 = -16;
        data.y1 = 0;
    }
    auto px = [&](double t) { return ML + (t - data.x0) / (data.x1 - data.x0) * (W - ML - MR); };
    auto py = [&](double ld) {
        return H - MB - (ld - data.y0) / (data.y1 - data.y0) * (H - MT - MB);
    };

    std::ostringstream os;
    os << svg_header(W, H);
    os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << (W - ML - MR)
       << "\" height=\"" << (H - MT - MB) << "\" fill=\"none\" stroke=\"black\"/>\n";
    // decade ticks on the log axis
    for (int d = static_cast<int>(std::ceil(data.y0)); d <= static_cast<int>(std::floor(data.y1));
         ++d) {
        const double y = py(d);
        os << "<line x1=\"" << ML - 4 << "\" y1=\"" << y << "\" x2=\"" << ML << "\" y2=\"" << y
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ML - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double t = data.x0 + (data.x1 - data.x0) * i / 5.0;
        const double x = px(t);
        os << "<line x1=\"" << x << "\" y1=\"" << H - MB << "\" x2=\"" << x << "\" y2=\""
           << H - MB + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << H - MB + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << format_g17(std::round(t * 100) / 100)
           << "</text>\n";
    }
    os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 14
       << "\" text-anchor=\"middle\" font-size=\"12\">t</text>\n";
    os << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << (MT + H - MB) / 2 << ")\">dK</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        os << "<polyline fill=\"none\" stroke=\"" << kStrokes[si % 6]
           << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& p : series[si]->samples) {
            if (p.d <= 0.0) continue;
            os << px(p.t) << ',' << py(std::log10(p.d)) << ' ';
        }
        os << "\"/>\n";
        if (si < labels.size())
            os << "<text x=\"" << ML + 10 << "\" y=\"" << MT + 16 + 14 * static_cast<int>(si)
               << "\" font-size=\"11\" fill=\"" << kStrokes[si % 6] << "\">" << labels[si]
               << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string polyline3_svg(const std::vector<std::vector<Vec3>>& polylines) {
    const int W = 600, H = 600;
    // fixed-camera orthographic view: x' = x + 0.35 z, y' = y + 0.35 z
    auto proj = [](const Vec3& p) {
        return std::pair<double, double>{p.x + 0.35 * p.z, p.y + 0.35 * p.z};
    };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& line : polylines)
        for (const auto& p : line) {
            const auto [u, v] = proj(p);
            x0 = std::min(x0, u);
            x1 = std::max(x1, u);
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (x0 >= x1 || y0 >= y1) {
        x0 = y0 = -1;
        x1 = y1 = 1;
    }
    const double span = std::max(x1 - x0, y1 - y0) * 1.1;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    auto px = [&](double u) { return (u - cx) / span * W + W / 2.0; };
    auto py = [&](double v) { return H / 2.0 - (v - cy) / span * H; };

    std::ostringstream os;
    os << svg_header(W, H);
    for (std::size_t i = 0; i < polylines.size(); ++i) {
        if (polylines[i].empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << kStrokes[i % 6]
           << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& p : polylines[i]) {
            const auto [u, v] = proj(p);
            os << px(u) << ',' << py(v) << ' ';
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace ksreg
