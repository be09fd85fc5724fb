#pragma once

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gridshape/dynamics.hpp"
#include "gridshape/locus.hpp"
#include "gridshape/netmodel.hpp"
#include "gridshape/stability.hpp"
#include "gridshape/tuning.hpp"

namespace gridshape {

std::string_view version();

// Rounded to 12 significant digits; non-finite values become null.
nlohmann::json number(double x);
nlohmann::json number_array(const Eigen::VectorXd& v);
nlohmann::json complex_json(Complex z);

nlohmann::json controller_json(const ControllerSpec& spec);
ControllerSpec controller_from_json(const nlohmann::json& j);
nlohmann::json targets_json(const TuningTargets& t);

// Metadata embedded in every report.
nlohmann::json report_header(const NetworkCase& c);

nlohmann::json spectrum_json(const ScaledSpectrum& s, const RepresentativeParams& p);
nlohmann::json analysis_json(const ModeAnalysis& a, const std::optional<StabilityRegion>& region);
nlohmann::json tuning_json(const TuningResult& r, const TuningTargets& t);
nlohmann::json geometry_json(const LocusGeometry& g);
nlohmann::json branches_json(const std::vector<LocusBranch>& branches);
nlohmann::json frontier_json(const std::vector<FrontierPoint>& frontier);
nlohmann::json envelope_json(const EnvelopeFit& fit);

// Sample indices keeping each series' minimum and maximum in every bucket,
// at most max_points in total.
std::vector<Eigen::Index> minmax_indices(const StepResponse& r, std::size_t max_points);

nlohmann::json response_json(const StepResponse& r, std::optional<std::size_t> max_points = std::nullopt);

// Header t, omega_1..omega_n, coi, pinv_1..pinv_n.
void write_response_csv(const StepResponse& r, std::ostream& out);

}  // namespace gridshape
