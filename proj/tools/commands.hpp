#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "allee/io.hpp"

namespace allee::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kNumericalFailure = 3,
    kGateFailure = 4,
};

enum class Format { Csv, Json };

/// What one command run produced: either a table (CSV or JSON records) or a JSON document.
struct Output {
    std::optional<Table> table;
    nlohmann::ordered_json json;
};

struct Request {
    std::string command; ///< simulate | equilibria | portrait | bifurcate | check
    std::string kind;    ///< sub-kind for bifurcate / check
    Config config;
    Format format = Format::Csv;
    std::filesystem::path outDir; ///< portrait only
};

std::string toolVersion();

/// Runs one command on an already-resolved config. Throws allee::Error subclasses;
/// map them with exitCodeFor.
Output run(const Request& req);

/// Exit code for an exception thrown by run().
int exitCodeFor(const std::exception& e);

/// Structured JSON for a failure: {"error": {"type", "reason", "exit_code"}}.
nlohmann::ordered_json errorJson(const std::exception& e);

/// Renders an Output as text: CSV or JSON for tables, JSON otherwise.
std::string render(const Output& out, Format format);

/// Runs `req` once per sweep value (in parallel), overriding `sweep.key`, and merges the
/// results in sweep-index order. The first failing index (lowest) decides the exception.
Output runSweep(const Request& req, const SweepSpec& sweep, unsigned threads = 0);

} // namespace allee::cli
