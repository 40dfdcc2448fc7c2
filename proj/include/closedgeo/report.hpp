#pragma once
#include "closedgeo/bott.hpp"
#include "closedgeo/level_ring.hpp"
#include "closedgeo/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace closedgeo {

// {:.12g}
std::string fmt_real(double x);
// RFC 4180 field quoting
std::string csv_field(const std::string& s);

struct CampaignConfig {
    ModelConfig model;
    // great_circle_grid | random | file
    std::string seeds = "great_circle_grid";
    int seed_count = 8;
    int segments = 64;
    int iterates = 8;
    double seed_noise = 0.01;
    std::string seed_file;
};

// model keys plus seeds, seed_count, segments, iterates, seed_noise, seed_file
CampaignConfig campaign_from(const KeyValues& kv);
CampaignConfig load_campaign(const std::string& path);

std::vector<DiscreteLoop> make_seeds(const CampaignConfig& cfg, const ModelPtr& model);

struct OrbitDatabase {
    ModelPtr model;
    std::vector<CriticalOrbit> orbits;
    // one line per seed that did not converge
    std::vector<std::string> failures;
};

// CLOSEDGEO_WORKERS, else the hardware thread count
int worker_count();
// seeds are solved independently and merged in orbit_less order, so the result
// does not depend on the worker count
OrbitDatabase run_campaign(const CampaignConfig& cfg, int workers);

// JSON lines: a header record with the canonical model string, then one record
// per orbit with vertices as hex floats
void write_orbit_db(std::ostream& out, const OrbitDatabase& db);
OrbitDatabase read_orbit_db(std::istream& in);

struct BottRow {
    int orbit = 0;
    double length = 0.0;
    int M = 0;
    std::vector<int> lambda;
    std::vector<int> nu;
    std::vector<int> segments;
    std::optional<OmegaIndex> omega;
    std::vector<int> bott;
    std::vector<int> upsilon;
    // exact | mismatch | excluded | undecided
    std::string round_trip;
    std::string note;
    IterationReport report;
};

BottRow bott_row(CriticalOrbit& orbit, int index, int M);
std::string bott_row_json(const BottRow& row);

struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string to_csv() const;
};

// phi_degrees, psi_degrees, betti, products, eliashberg
std::vector<CsvTable> ring_tables(const ClosedModelPtr& model, int max_t, int max_degree, Coeff coeff);

}  // namespace closedgeo
