#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lolight/normalform.hpp"

namespace lolight {

// ---------------------------------------------------------------------------
// The Table-1 / Table-2 decision: given a normal form (or a torus spec) plus
// arithmetic certificates, identify the row/case, the group Aff(g)/Isom(g)
// with its generators, the compactness of Isom(g), and Im C.
// ---------------------------------------------------------------------------

struct GeneratorReport {
    std::string kind; // make_generator vocabulary
    GeneratorParams params;
    double C = 0;          // measured affine defect
    double residual = 0;   // defect residual
    double r_invariance = 0;
    bool normalizes = false;
    double N_squared = 0;  // |N^2| of the decomposition
};

enum class Tribool { yes, no, undecided };

struct ClassReport {
    char table1_row = '?';            // a, b, c, d
    int table2_case = 0;              // 1..9; 0 with special below
    std::string special;              // "flat_torus" | "undecided" | ""
    std::string group;                // trivial | Z | Z2 | R
    std::vector<GeneratorReport> generators;
    Tribool isom_compact = Tribool::undecided;
    std::string imC;                  // symbolic description
    std::vector<double> imC_samples;  // measured defect(s) backing imC
    std::vector<std::string> caveats;
    bool flat = false;
    double r_sup = 0;
};

// Inputs: a torusA/B spec, or a reduced normal form of either family.
using ClassifyInput = std::variant<MetricSpec, NormalFormDio, NormalFormClosed>;

ClassReport classify(const ClassifyInput& input);

// Non-compactness of Isom(g) for the closed-orbit families: mu constant and
// both certificates rational (Lcal for n != 0 where k = 0 holds anyway).
Tribool isom_compactness(const NormalFormClosed& nf, std::string* why = nullptr);

// Human-readable Im C with the measured generator defects; fills the report's
// imC fields.
void imC_description(ClassReport& report, const ClassifyInput& input);

} // namespace lolight
