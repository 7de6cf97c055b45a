#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "uemr/analyses.hpp"

namespace uemr::report {

// Every analysis emits one schema-versioned JSON document. Seeds, counts, and
// method labels ride along so a table can be reproduced from the document
// alone.
nlohmann::json to_json(const stats::RatioWithCI& r);
nlohmann::json to_json(const stats::MwuResult& r);
nlohmann::json to_json(const stats::InteractionResult& r);
nlohmann::json to_json(const stats::ChannelTestResult& r);

nlohmann::json excess_document(const analysis::ExcessReport& r,
                               const analysis::AnalysisConfig& cfg);
nlohmann::json polarisation_document(const analysis::PolarisationReport& r,
                                     const analysis::AnalysisConfig& cfg);
nlohmann::json fine_channel_document(const analysis::FineChannelReport& r,
                                     const std::vector<analysis::ControlChannelZ>& controls,
                                     const analysis::AnalysisConfig& cfg);
nlohmann::json mechanism_document(const analysis::MechanismReport& r,
                                  const analysis::AnalysisConfig& cfg);
nlohmann::json eclipse_document(const analysis::EclipseReport& r,
                                const analysis::AnalysisConfig& cfg);
nlohmann::json thermal_document(double flux_jy, double emissivity, double temperature_k,
                                double area_m2, double wavelength_m, double range_m);
nlohmann::json dynspec_document(const analysis::DynamicSpectrum& r);

// Renders the markdown summary from previously written analysis documents.
// Rendering only: nothing is recomputed. Missing documents are listed as
// warnings at the top of the output.
std::string render_markdown(const std::string& analysis_dir);

// Plot-ready CSV tables for one analysis document (per-channel ratios,
// channel tests, eclipse strata, fine-bin stats, dynamic-spectrum matrix).
// Returns the paths written.
std::vector<std::string> write_csv_tables(const std::string& analysis_dir,
                                          const nlohmann::json& document);

}  // namespace uemr::report
