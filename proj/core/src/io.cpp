#include "qcbadc/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcbadc {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty())
        throw std::runtime_error("matrix field must be a non-empty array of rows");
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != nc)
            throw std::runtime_error("matrix rows have inconsistent lengths");
        for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) { ok = true; break; }
        if (!ok) throw std::runtime_error("unknown key \"" + key + "\" in " + where);
    }
}

// Pull a frequency that may be given relative to fs ("key") or absolute
// ("key_hz"); giving both is an error.
bool read_frequency(const json& obj, const std::string& key, double fs_hz,
                    double& out) {
    const std::string hz_key = key + "_hz";
    const bool rel = obj.contains(key), abs = obj.contains(hz_key);
    if (rel && abs)
        throw std::runtime_error("both \"" + key + "\" and \"" + hz_key + "\" given");
    if (rel) out = obj.at(key).get<double>() * fs_hz;
    if (abs) out = obj.at(hz_key).get<double>();
    return rel || abs;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
double get_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

constexpr std::uint32_t kTraceMagic = 0x52544351;   // "QCTR"
constexpr std::uint32_t kFilterMagic = 0x52464351;  // "QCFR"

}  // namespace

DesignDocument make_design_document(const DesignSpec& spec) {
    spec.validate();
    DesignDocument doc;
    doc.spec = spec;
    doc.lowpass = design_lowpass(spec);
    const double omega_n = 2.0 * std::numbers::pi * spec.fn_hz;
    doc.system = quadrature_transform(doc.lowpass, omega_n);
    doc.control = synthesize_control(doc.lowpass.beta, omega_n, doc.lowpass.period,
                                     spec.phi_kappa, spec.tau_dc);
    const double bandwidth = spec.fs_hz / (2.0 * spec.osr);
    doc.f_test_hz = spec.fn_hz - bandwidth / 4.0;
    doc.f_train_hz = spec.fn_hz + bandwidth / 4.0;
    return doc;
}

std::string design_document_to_json(const DesignDocument& doc) {
    json j;
    j["version"] = kToolkitVersion;
    j["n"] = doc.spec.n;
    j["osr"] = doc.spec.osr;
    j["fs"] = doc.spec.fs_hz;
    j["fn"] = doc.spec.fn_hz;
    j["phi_kappa"] = doc.spec.phi_kappa;
    j["tau_dc"] = doc.spec.tau_dc;
    j["v_fs"] = doc.spec.v_fs;
    j["beta"] = doc.lowpass.beta;
    j["alpha"] = doc.lowpass.alpha;
    j["omega_b"] = doc.lowpass.omega_b;
    j["omega_n"] = doc.system.omega_n;
    j["a"] = matrix_to_json(doc.system.a);
    j["b"] = matrix_to_json(doc.system.b);
    j["control"] = {{"kappa_phi", doc.control.kappa},
                    {"kbar_phi", doc.control.kappa_bar},
                    {"ktilde_phi", doc.control.kappa_tilde},
                    {"kbar_tilde_phi", doc.control.kappa_bar_tilde},
                    {"phi_kappa", doc.control.phi_kappa},
                    {"tau_dc", doc.control.tau_dc}};
    j["f_test"] = doc.f_test_hz;
    j["f_train"] = doc.f_train_hz;
    return j.dump(2) + "\n";
}

DesignDocument design_document_from_json(const std::string& text) {
    const json j = json::parse(text);
    reject_unknown_keys(j,
                        {"version", "n", "osr", "fs", "fn", "phi_kappa", "tau_dc",
                         "v_fs", "beta", "alpha", "omega_b", "omega_n", "a", "b",
                         "control", "f_test", "f_train"},
                        "design document");
    DesignDocument doc;
    doc.spec.n = j.at("n").get<int>();
    doc.spec.osr = j.at("osr").get<double>();
    doc.spec.fs_hz = j.at("fs").get<double>();
    doc.spec.fn_hz = j.at("fn").get<double>();
    doc.spec.phi_kappa = j.at("phi_kappa").get<double>();
    doc.spec.tau_dc = j.at("tau_dc").get<double>();
    doc.spec.v_fs = j.at("v_fs").get<double>();
    doc.spec.validate();

    doc.lowpass.n = doc.spec.n;
    doc.lowpass.beta = j.at("beta").get<double>();
    doc.lowpass.alpha = j.at("alpha").get<double>();
    doc.lowpass.omega_b = j.at("omega_b").get<double>();
    doc.lowpass.period = 1.0 / doc.spec.fs_hz;

    doc.system.n = doc.spec.n;
    doc.system.omega_n = j.at("omega_n").get<double>();
    doc.system.a = matrix_from_json(j.at("a"));
    doc.system.b = matrix_from_json(j.at("b"));
    doc.system.lowpass = doc.lowpass;
    if (doc.system.a.rows() != 2 * doc.spec.n || doc.system.a.cols() != 2 * doc.spec.n ||
        doc.system.b.rows() != 2 * doc.spec.n || doc.system.b.cols() != 2)
        throw std::runtime_error("design document: matrix shapes do not match n");

    const json& c = j.at("control");
    reject_unknown_keys(c,
                        {"kappa_phi", "kbar_phi", "ktilde_phi", "kbar_tilde_phi",
                         "phi_kappa", "tau_dc"},
                        "control");
    doc.control.kappa = c.at("kappa_phi").get<double>();
    doc.control.kappa_bar = c.at("kbar_phi").get<double>();
    doc.control.kappa_tilde = c.at("ktilde_phi").get<double>();
    doc.control.kappa_bar_tilde = c.at("kbar_tilde_phi").get<double>();
    doc.control.phi_kappa = c.at("phi_kappa").get<double>();
    doc.control.tau_dc = c.at("tau_dc").get<double>();
    doc.control.period = doc.lowpass.period;

    doc.f_test_hz = j.at("f_test").get<double>();
    doc.f_train_hz = j.at("f_train").get<double>();
    return doc;
}

void save_design_document(const DesignDocument& doc, const std::string& path) {
    write_file(path, design_document_to_json(doc));
}

DesignDocument load_design_document(const std::string& path) {
    return design_document_from_json(read_file(path));
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    const json j = json::parse(json_text);
    reject_unknown_keys(
        j, {"design", "sim", "calibration", "analysis", "montecarlo", "output_dir"},
        "experiment config");
    ExperimentConfig cfg;

    if (j.contains("design")) {
        const json& d = j.at("design");
        reject_unknown_keys(d,
                            {"n", "osr", "fs_hz", "fn", "fn_hz", "phi_kappa",
                             "tau_dc", "tau_dc_s", "v_fs"},
                            "design");
        if (d.contains("fs_hz")) cfg.design.fs_hz = d.at("fs_hz").get<double>();
        if (d.contains("n")) cfg.design.n = d.at("n").get<int>();
        if (d.contains("osr")) cfg.design.osr = d.at("osr").get<double>();
        read_frequency(d, "fn", cfg.design.fs_hz, cfg.design.fn_hz);
        if (d.contains("phi_kappa")) cfg.design.phi_kappa = d.at("phi_kappa").get<double>();
        if (d.contains("tau_dc") && d.contains("tau_dc_s"))
            throw std::runtime_error("both \"tau_dc\" and \"tau_dc_s\" given");
        if (d.contains("tau_dc"))
            cfg.design.tau_dc = d.at("tau_dc").get<double>() / cfg.design.fs_hz;
        if (d.contains("tau_dc_s")) cfg.design.tau_dc = d.at("tau_dc_s").get<double>();
        if (d.contains("v_fs")) cfg.design.v_fs = d.at("v_fs").get<double>();
    }
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        reject_unknown_keys(s,
                            {"train_periods", "test_periods", "substeps",
                             "instability_threshold", "scheme"},
                            "sim");
        if (s.contains("train_periods"))
            cfg.train_periods = s.at("train_periods").get<long long>();
        if (s.contains("test_periods"))
            cfg.test_periods = s.at("test_periods").get<long long>();
        if (s.contains("substeps")) cfg.substeps = s.at("substeps").get<int>();
        if (s.contains("instability_threshold"))
            cfg.instability_threshold = s.at("instability_threshold").get<double>();
        if (s.contains("scheme")) {
            const std::string name = s.at("scheme").get<std::string>();
            if (name == "rk4")
                cfg.scheme = SimConfig::Scheme::rk4;
            else if (name == "exact")
                cfg.scheme = SimConfig::Scheme::exact;
            else
                throw std::runtime_error("scheme must be \"rk4\" or \"exact\"");
        }
    }
    if (j.contains("calibration")) {
        const json& c = j.at("calibration");
        reject_unknown_keys(c,
                            {"taps", "ridge", "tolerance", "max_iterations",
                             "pair_channels", "auto_taps", "max_taps",
                             "weight_f_lo_hz", "weight_f_hi_hz"},
                            "calibration");
        if (c.contains("taps"))
            cfg.calibration.taps_per_channel = c.at("taps").get<int>();
        if (c.contains("ridge")) cfg.calibration.ridge = c.at("ridge").get<double>();
        if (c.contains("tolerance"))
            cfg.calibration.tolerance = c.at("tolerance").get<double>();
        if (c.contains("max_iterations"))
            cfg.calibration.max_iterations = c.at("max_iterations").get<int>();
        if (c.contains("pair_channels"))
            cfg.calibration.pair_channels = c.at("pair_channels").get<bool>();
        if (c.contains("weight_f_lo_hz"))
            cfg.calibration.weight_f_lo = c.at("weight_f_lo_hz").get<double>();
        if (c.contains("weight_f_hi_hz"))
            cfg.calibration.weight_f_hi = c.at("weight_f_hi_hz").get<double>();
        if (c.contains("auto_taps")) cfg.auto_taps = c.at("auto_taps").get<bool>();
        if (c.contains("max_taps")) cfg.max_taps = c.at("max_taps").get<int>();
    }
    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        reject_unknown_keys(a, {"nfft", "window", "guard_bins"}, "analysis");
        if (a.contains("nfft")) cfg.nfft = a.at("nfft").get<int>();
        if (a.contains("window")) {
            const std::string name = a.at("window").get<std::string>();
            if (name == "hann")
                cfg.window = Window::hann;
            else if (name == "rectangular")
                cfg.window = Window::rectangular;
            else
                throw std::runtime_error("window must be \"hann\" or \"rectangular\"");
        }
        if (a.contains("guard_bins")) cfg.guard_bins = a.at("guard_bins").get<int>();
    }
    if (j.contains("montecarlo")) {
        const json& m = j.at("montecarlo");
        reject_unknown_keys(m, {"trials", "half_width", "seed", "workers"},
                            "montecarlo");
        if (m.contains("trials")) cfg.mc_trials = m.at("trials").get<int>();
        if (m.contains("half_width"))
            cfg.mc_half_width = m.at("half_width").get<double>();
        if (m.contains("seed")) cfg.master_seed = m.at("seed").get<std::uint64_t>();
        if (m.contains("workers")) cfg.workers = m.at("workers").get<int>();
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

    cfg.design.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    try {
        return parse_experiment_config(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["design"] = {{"n", cfg.design.n},
                   {"osr", cfg.design.osr},
                   {"fs_hz", cfg.design.fs_hz},
                   {"fn_hz", cfg.design.fn_hz},
                   {"phi_kappa", cfg.design.phi_kappa},
                   {"tau_dc_s", cfg.design.tau_dc},
                   {"v_fs", cfg.design.v_fs}};
    j["sim"] = {{"train_periods", cfg.train_periods},
                {"test_periods", cfg.test_periods},
                {"substeps", cfg.substeps},
                {"instability_threshold", cfg.instability_threshold},
                {"scheme", cfg.scheme == SimConfig::Scheme::rk4 ? "rk4" : "exact"}};
    j["calibration"] = {{"taps", cfg.calibration.taps_per_channel},
                        {"ridge", cfg.calibration.ridge},
                        {"tolerance", cfg.calibration.tolerance},
                        {"max_iterations", cfg.calibration.max_iterations},
                        {"pair_channels", cfg.calibration.pair_channels},
                        {"weight_f_lo_hz", cfg.calibration.weight_f_lo},
                        {"weight_f_hi_hz", cfg.calibration.weight_f_hi},
                        {"auto_taps", cfg.auto_taps},
                        {"max_taps", cfg.max_taps}};
    j["analysis"] = {{"nfft", cfg.nfft},
                     {"window", cfg.window == Window::hann ? "hann" : "rectangular"},
                     {"guard_bins", cfg.guard_bins}};
    j["montecarlo"] = {{"trials", cfg.mc_trials},
                       {"half_width", cfg.mc_half_width},
                       {"seed", cfg.master_seed},
                       {"workers", cfg.workers}};
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

void save_trace_bits(const ControlTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    put_u32(out, kTraceMagic);
    put_u32(out, 1);  // format version
    put_u32(out, static_cast<std::uint32_t>(trace.channels));
    put_u64(out, static_cast<std::uint64_t>(trace.length));
    put_f64(out, trace.period);
    const std::size_t bytes_per_channel = (static_cast<std::size_t>(trace.length) + 7) / 8;
    std::vector<unsigned char> packed(bytes_per_channel);
    for (int ch = 0; ch < trace.channels; ++ch) {
        std::fill(packed.begin(), packed.end(), 0);
        for (long long k = 0; k < trace.length; ++k)
            if (trace.at(ch, k) > 0) packed[k >> 3] |= static_cast<unsigned char>(1u << (k & 7));
        out.write(reinterpret_cast<const char*>(packed.data()),
                  static_cast<std::streamsize>(packed.size()));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

ControlTrace load_trace_bits(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (get_u32(in) != kTraceMagic) throw std::runtime_error(path + ": not a trace file");
    if (get_u32(in) != 1) throw std::runtime_error(path + ": unsupported trace version");
    ControlTrace trace;
    trace.channels = static_cast<int>(get_u32(in));
    trace.length = static_cast<long long>(get_u64(in));
    trace.period = get_f64(in);
    if (!in || trace.channels <= 0 || trace.length < 0)
        throw std::runtime_error(path + ": corrupt trace header");
    trace.decisions.assign(
        static_cast<std::size_t>(trace.length) * trace.channels, -1);
    const std::size_t bytes_per_channel = (static_cast<std::size_t>(trace.length) + 7) / 8;
    std::vector<unsigned char> packed(bytes_per_channel);
    for (int ch = 0; ch < trace.channels; ++ch) {
        in.read(reinterpret_cast<char*>(packed.data()),
                static_cast<std::streamsize>(packed.size()));
        if (!in) throw std::runtime_error(path + ": truncated trace payload");
        for (long long k = 0; k < trace.length; ++k)
            if (packed[k >> 3] & (1u << (k & 7)))
                trace.decisions[static_cast<std::size_t>(k) * trace.channels + ch] = 1;
    }
    return trace;
}

void save_trace_csv(const ControlTrace& trace, const std::string& path) {
    std::ostringstream out;
    out << "k";
    for (int ch = 0; ch < trace.channels; ++ch) out << ",s" << ch;
    out << "\n";
    for (long long k = 0; k < trace.length; ++k) {
        out << k;
        for (int ch = 0; ch < trace.channels; ++ch)
            out << ',' << static_cast<int>(trace.at(ch, k));
        out << "\n";
    }
    write_file(path, out.str());
}

void save_filter(const FirEstimator& fir, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    put_u32(out, kFilterMagic);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(fir.n_outputs));
    put_u32(out, static_cast<std::uint32_t>(fir.n_channels));
    put_u32(out, static_cast<std::uint32_t>(fir.taps_per_channel));
    put_u32(out, static_cast<std::uint32_t>(fir.delay));
    out.write(reinterpret_cast<const char*>(fir.taps.data()),
              static_cast<std::streamsize>(fir.taps.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

FirEstimator load_filter(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (get_u32(in) != kFilterMagic)
        throw std::runtime_error(path + ": not a filter file");
    if (get_u32(in) != 1) throw std::runtime_error(path + ": unsupported filter version");
    FirEstimator fir;
    fir.n_outputs = static_cast<int>(get_u32(in));
    fir.n_channels = static_cast<int>(get_u32(in));
    fir.taps_per_channel = static_cast<int>(get_u32(in));
    fir.delay = static_cast<int>(get_u32(in));
    if (!in || fir.n_outputs <= 0 || fir.n_channels <= 0 || fir.taps_per_channel <= 0)
        throw std::runtime_error(path + ": corrupt filter header");
    fir.taps.resize(static_cast<std::size_t>(fir.n_outputs) * fir.n_channels *
                    fir.taps_per_channel);
    in.read(reinterpret_cast<char*>(fir.taps.data()),
            static_cast<std::streamsize>(fir.taps.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated filter payload");
    return fir;
}

void save_filter_csv(const FirEstimator& fir, const std::string& path) {
    std::ostringstream out;
    out << "output,channel,m,tap\n";
    for (int o = 0; o < fir.n_outputs; ++o)
        for (int ch = 0; ch < fir.n_channels; ++ch)
            for (int m = 0; m < fir.taps_per_channel; ++m)
                out << o << ',' << ch << ',' << m << ',' << fmt(fir.tap(o, ch, m))
                    << "\n";
    write_file(path, out.str());
}

void save_spectrum_csv(const Spectrum& spec, const std::string& path,
                       bool positive_half_only) {
    std::ostringstream out;
    out << "fT,psd_db\n";
    for (int i = 0; i < spec.nfft; ++i) {
        const double f = spec.frequency_hz[i];
        if (positive_half_only && f < 0.0) continue;
        const double db = 10.0 * std::log10(std::max(spec.psd[i], 1e-300));
        out << fmt(f / spec.fs_hz) << ',' << fmt(db) << "\n";
    }
    write_file(path, out.str());
}

void save_snr_report_json(const SnrReport& report, const std::string& path) {
    json j;
    j["snr_db"] = report.snr_db;
    j["signal_power"] = report.signal_power;
    j["noise_power"] = report.noise_power;
    j["f_lo"] = report.f_lo;
    j["f_hi"] = report.f_hi;
    j["signal_bins"] = report.signal_bins;
    j["noise_bin_count"] = report.noise_bin_count;
    write_file(path, j.dump(2) + "\n");
}

namespace {

std::string trial_row(const TrialResult& t) {
    std::ostringstream out;
    out << t.index << ',' << t.seed << ',' << (t.stable ? 1 : 0) << ','
        << fmt(t.snr_db) << ',' << fmt(t.f_hat_n) << "\n";
    return out.str();
}

constexpr const char* kTrialHeader = "index,seed,stable,snr_db,f_hat_n\n";

}  // namespace

void save_mc_trials_csv(const std::vector<TrialResult>& trials,
                        const std::string& path) {
    std::ostringstream out;
    out << kTrialHeader;
    for (const TrialResult& t : trials) out << trial_row(t);
    write_file(path, out.str());
}

void append_trial_checkpoint(const TrialResult& trial, const std::string& path) {
    const bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path + " for append");
    if (fresh) out << kTrialHeader;
    out << trial_row(trial);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialResult> load_trial_checkpoint(const std::string& path) {
    std::ifstream in(path);
    std::vector<TrialResult> trials;
    if (!in) return trials;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        TrialResult t;
        char c = 0;
        int stable = 0;
        if (!(row >> t.index >> c >> t.seed >> c >> stable >> c >> t.snr_db >> c >>
              t.f_hat_n))
            throw std::runtime_error(path + ": malformed checkpoint row: " + line);
        t.stable = stable != 0;
        trials.push_back(t);
    }
    return trials;
}

namespace {

void write_histogram(const std::vector<double>& values, double lo, double hi,
                     int nbins, const std::string& path) {
    std::vector<long long> counts(nbins, 0);
    const double width = (hi - lo) / nbins;
    for (double v : values) {
        int b = static_cast<int>(std::floor((v - lo) / width));
        b = std::max(0, std::min(nbins - 1, b));  // clamp outliers into edge bins
        ++counts[b];
    }
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < nbins; ++b)
        out << fmt(lo + b * width) << ',' << fmt(lo + (b + 1) * width) << ','
            << counts[b] << "\n";
    write_file(path, out.str());
}

}  // namespace

void save_mc_histograms(const McReport& report, double f_n_hz,
                        const std::string& snr_path, const std::string& fn_path) {
    std::vector<double> snr_rel, fn_rel;
    for (const TrialResult& t : report.trials) {
        if (!t.stable) continue;
        snr_rel.push_back(t.snr_db - report.nominal_snr_db);
        if (std::isfinite(t.f_hat_n) && f_n_hz > 0.0)
            fn_rel.push_back(t.f_hat_n / f_n_hz);
    }
    write_histogram(snr_rel, -6.0, 4.0, 40, snr_path);
    write_histogram(fn_rel, 0.90, 1.10, 40, fn_path);
}

void save_provenance(const ExperimentConfig& cfg, const std::string& path) {
    json j;
    j["version"] = kToolkitVersion;
    j["master_seed"] = cfg.master_seed;
    j["config"] = json::parse(experiment_config_to_json(cfg));
    write_file(path, j.dump(2) + "\n");
}

}  // namespace qcbadc
