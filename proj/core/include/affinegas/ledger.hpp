#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "affinegas/eulerian.hpp"

namespace affinegas {

struct Claim {
    std::string name;
    bool pass = false;
    std::string measured;
};

/// One JSON-lines ledger: a header, then snapshot, residual, sample and claim records.
struct LedgerFile {
    std::string kind;  ///< "affine", "evolve" or "verify"
    std::string scenario;
    RunLedger run;
    std::map<std::string, double> metrics;
    std::vector<ResidualReport> residuals;
    std::vector<std::map<std::string, double>> samples;
    std::vector<Claim> claims;
};

void write_ledger(std::ostream& os, const LedgerFile& f);
void write_ledger(const std::filesystem::path& path, const LedgerFile& f);

/// Throws LedgerCorrupt naming `source` and the offending line.
LedgerFile read_ledger(std::istream& is, const std::string& source = "<stream>");
LedgerFile read_ledger(const std::filesystem::path& path);

/// Per-snapshot table: tau, norms, sup norms, monitors and the support radius at `threshold`.
void write_snapshots_csv(std::ostream& os, const RunLedger& led, double threshold);

}  // namespace affinegas
