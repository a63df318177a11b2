#pragma once

#include <filesystem>
#include <map>
#include <set>

#include "polarlink/estimator.hpp"

namespace polarlink {

/// Scenario file problem; the message names the offending section/key.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Experiment-level settings that sit outside the per-module configs.
struct SweepPlan {
    std::vector<double> distances_m;     // heatmap / comparison distances
    std::vector<double> frequencies_hz;  // frequency sweep points
    std::vector<double> tx_powers_dbm;   // power sweep points
    // Detection threshold for the power sweep: below this SNR the receiver
    // cannot lock and the effective capacity is zero.
    std::optional<double> min_detectable_snr_db;
};

struct ScenarioBundle {
    LinkScenario link;
    SweepConfig controller;
    EstimatorConfig estimator;
    SweepPlan sweep;
};

namespace detail {

struct RawScenario {
    // section -> key -> values (insertion order kept per key)
    std::map<std::string, std::map<std::string, std::vector<std::string>>> sections;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawScenario read_raw_scenario(std::istream& in) {
    RawScenario raw;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("scenario line " + std::to_string(line_no) +
                                   ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("scenario line " + std::to_string(line_no) +
                               ": expected 'key = value'");
        if (section.empty())
            throw config_error("scenario line " + std::to_string(line_no) +
                               ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("scenario line " + std::to_string(line_no) +
                               ": empty key or value");
        raw.sections[section][key].push_back(value);
    }
    return raw;
}

class SectionReader {
  public:
    SectionReader(const RawScenario& raw, std::string section) : section_(std::move(section)) {
        auto it = raw.sections.find(section_);
        if (it != raw.sections.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }

    std::optional<std::string> get(const std::string& key) {
        seen_.insert(key);
        if (!entries_) return std::nullopt;
        auto it = entries_->find(key);
        if (it == entries_->end()) return std::nullopt;
        if (it->second.size() > 1) throw config_error(where(key) + ": duplicate key");
        return it->second.front();
    }

    std::vector<std::string> get_all(const std::string& key) {
        seen_.insert(key);
        if (!entries_) return {};
        auto it = entries_->find(key);
        return it == entries_->end() ? std::vector<std::string>{} : it->second;
    }

    double number(const std::string& key, double fallback) {
        auto v = get(key);
        return v ? parse_number(key, *v) : fallback;
    }

    double required_number(const std::string& key) {
        auto v = get(key);
        if (!v) throw config_error(where(key) + ": required key missing");
        return parse_number(key, *v);
    }

    long integer(const std::string& key, long fallback) {
        auto v = get(key);
        if (!v) return fallback;
        const double d = parse_number(key, *v);
        if (d != std::floor(d)) throw config_error(where(key) + ": expected an integer");
        return static_cast<long>(d);
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "0") return false;
        throw config_error(where(key) + ": expected a boolean, got '" + *v + "'");
    }

    std::vector<double> number_list(const std::string& key) {
        auto v = get(key);
        if (!v) return {};
        std::vector<double> out;
        std::stringstream ss(*v);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(parse_number(key, trim(cell)));
        return out;
    }

    double parse_number(const std::string& key, const std::string& text) const {
        try {
            std::size_t pos = 0;
            const double d = std::stod(text, &pos);
            if (pos != text.size() || std::isnan(d)) throw std::invalid_argument(text);
            return d;
        } catch (const std::exception&) {
            throw config_error(where(key) + ": expected a number, got '" + text + "'");
        }
    }

    void reject_unknown() const {
        if (!entries_) return;
        for (const auto& [key, _] : *entries_)
            if (!seen_.count(key)) throw config_error(where(key) + ": unknown key");
    }

    std::string where(const std::string& key) const { return "[" + section_ + "] " + key; }

  private:
    std::string section_;
    const std::map<std::string, std::vector<std::string>>* entries_{nullptr};
    std::set<std::string> seen_;
};

}  // namespace detail

/// Parses a scenario document. Relative file references (rotation table,
/// loss table) resolve against `base_dir`. Unknown sections or keys are
/// rejected with the offending name.
inline ScenarioBundle parse_scenario(std::istream& in,
                                     const std::filesystem::path& base_dir = ".") {
    const detail::RawScenario raw = detail::read_raw_scenario(in);
    for (const auto& [name, _] : raw.sections)
        if (name != "link" && name != "surface" && name != "controller" && name != "estimator" &&
            name != "sweep")
            throw config_error("[" + name + "]: unknown section");

    ScenarioBundle bundle;

    detail::SectionReader link(raw, "link");
    if (!link.present()) throw config_error("[link]: required section missing");
    bundle.link.frequency_hz = link.required_number("frequency_hz");
    bundle.link.tx_power_dbm = link.required_number("tx_power_dbm");
    bundle.link.tx_orientation = RotationAngle(link.required_number("tx_orientation_deg"));
    bundle.link.rx_orientation = RotationAngle(link.required_number("rx_orientation_deg"));
    bundle.link.tx_rx_distance_m = link.required_number("tx_rx_distance_m");
    bundle.link.tx_surface_distance_m =
        link.number("tx_surface_distance_m", bundle.link.tx_rx_distance_m / 2.0);
    if (auto v = link.get("bypass_fraction")) {
        if (*v == "auto")
            bundle.link.bypass_fraction.reset();
        else
            bundle.link.bypass_fraction = link.parse_number("bypass_fraction", *v);
    }
    bundle.link.combining_phase_deg = link.number("combining_phase_deg", 0.0);
    bundle.link.antenna_beamwidth_deg = link.number("antenna_beamwidth_deg", 180.0);
    bundle.link.crosspol_floor_db = link.number("crosspol_floor_db", -30.0);
    bundle.link.noise_floor_dbm = link.number("noise_floor_dbm", -90.0);
    bundle.link.noise_sigma_db = link.number("noise_sigma_db", 0.5);
    bundle.link.n_averages = static_cast<int>(link.integer("n_averages", 1));
    bundle.link.tx_gain_dbi = link.number("tx_gain_dbi", 0.0);
    bundle.link.rx_gain_dbi = link.number("rx_gain_dbi", 0.0);
    const long seed = link.integer("rng_seed", 42);
    if (seed < 0) throw config_error("[link] rng_seed: must be non-negative");
    bundle.link.rng_seed = static_cast<std::uint64_t>(seed);
    for (const std::string& spec : link.get_all("extra_ray")) {
        std::vector<double> parts;
        std::stringstream ss(spec);
        std::string cell;
        while (std::getline(ss, cell, ','))
            parts.push_back(link.parse_number("extra_ray", detail::trim(cell)));
        if (parts.size() != 3)
            throw config_error("[link] extra_ray: expected 'amplitude,phase_deg,polarization_deg'");
        bundle.link.extra_rays.push_back({parts[0], parts[1], parts[2]});
    }
    link.reject_unknown();

    detail::SectionReader surface(raw, "surface");
    if (surface.present() && surface.boolean("present", true)) {
        SurfaceModel model;
        if (auto v = surface.get("mode")) {
            if (*v == "transmissive")
                model.mode = SurfaceMode::transmissive;
            else if (*v == "reflective")
                model.mode = SurfaceMode::reflective;
            else
                throw config_error("[surface] mode: expected transmissive or reflective, got '" +
                                   *v + "'");
        }
        model.insertion_loss_db = surface.number("insertion_loss_db", -5.0);
        model.reflective_rotation_factor = surface.number("reflective_rotation_factor", 0.3);
        bundle.link.surface_side_m = surface.number("side_m", 0.48);
        if (auto v = surface.get("rotation_table"); v && *v != "builtin")
            model.rotation_table = load_rotation_table_csv((base_dir / *v).string());
        if (auto v = surface.get("loss_table")) {
            std::ifstream lt(base_dir / *v);
            if (!lt) throw config_error("[surface] loss_table: cannot open '" + *v + "'");
            std::string line;
            if (!std::getline(lt, line))
                throw config_error("[surface] loss_table: empty file '" + *v + "'");
            while (std::getline(lt, line)) {
                line = detail::trim(line);
                if (line.empty()) continue;
                const auto comma = line.find(',');
                if (comma == std::string::npos)
                    throw config_error("[surface] loss_table: expected 'frequency_hz,loss_db'");
                model.loss_table.emplace_back(
                    surface.parse_number("loss_table", detail::trim(line.substr(0, comma))),
                    surface.parse_number("loss_table", detail::trim(line.substr(comma + 1))));
            }
        }
        bundle.link.surface = std::move(model);
    } else if (surface.present()) {
        // present = false: tolerate but ignore the descriptive keys
        surface.get("mode");
        surface.get("insertion_loss_db");
        surface.get("reflective_rotation_factor");
        surface.get("side_m");
        surface.get("rotation_table");
        surface.get("loss_table");
    }
    surface.reject_unknown();

    detail::SectionReader controller(raw, "controller");
    bundle.controller.n_iterations = static_cast<int>(controller.integer("n_iterations", 2));
    bundle.controller.steps_per_axis = static_cast<int>(controller.integer("steps_per_axis", 5));
    bundle.controller.v_min = controller.number("v_min", 0.0);
    bundle.controller.v_max = controller.number("v_max", 30.0);
    bundle.controller.settle_time_s = controller.number("settle_time_s", 0.02);
    if (auto v = controller.get("refinement")) {
        if (*v == "trailing")
            bundle.controller.refinement = RefinementRule::trailing;
        else if (*v == "centered")
            bundle.controller.refinement = RefinementRule::centered;
        else
            throw config_error("[controller] refinement: expected trailing or centered");
    }
    bundle.controller.attribution_lag =
        static_cast<int>(controller.integer("attribution_lag", 0));
    controller.reject_unknown();

    detail::SectionReader estimator(raw, "estimator");
    bundle.estimator.resolution_deg = estimator.number("resolution_deg", 1.0);
    bundle.estimator.bias_step_volts = estimator.number("bias_step_volts", 1.0);
    if (auto v = estimator.get("alignment_mode")) {
        if (*v == "min_rotation_bias")
            bundle.estimator.alignment_mode = AlignmentMode::min_rotation_bias;
        else if (*v == "surface_absent")
            bundle.estimator.alignment_mode = AlignmentMode::surface_absent;
        else
            throw config_error(
                "[estimator] alignment_mode: expected min_rotation_bias or surface_absent");
    }
    estimator.reject_unknown();

    detail::SectionReader sweep(raw, "sweep");
    bundle.sweep.distances_m = sweep.number_list("distances_m");
    bundle.sweep.frequencies_hz = sweep.number_list("frequencies_hz");
    bundle.sweep.tx_powers_dbm = sweep.number_list("tx_powers_dbm");
    if (auto v = sweep.get("min_detectable_snr_db"))
        bundle.sweep.min_detectable_snr_db = sweep.parse_number("min_detectable_snr_db", *v);
    sweep.reject_unknown();

    try {
        bundle.link.validate();
        bundle.controller.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    for (double d : bundle.sweep.distances_m)
        if (!(d > 0.0)) throw config_error("[sweep] distances_m: distances must be positive");
    return bundle;
}

inline ScenarioBundle load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scenario file '" + path.string() + "'");
    return parse_scenario(in, path.parent_path());
}

}  // namespace polarlink
