#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qtyp/structure.hpp"
#include "qtyp/trajectory_graph.hpp"
#include "qtyp/typicality.hpp"

namespace qtyp {

// Amplitudes of the optical elements. A half-silvered mirror keeps the mode
// label with amplitude `transmit` and swaps U <-> D with amplitude `reflect`;
// the full mirrors between passes multiply both arms by `mirror`.
struct MirrorConvention {
    Complex transmit;
    Complex reflect;
    Complex mirror;
    std::string source_mode;
};

MirrorConvention default_convention();

enum class Arm { U1, D1 };

std::string_view to_string(Arm arm);
Arm parse_arm(std::string_view text);

// Cell labels used by the multi-pass interferometer.
inline constexpr const char* kUpper = "U";
inline constexpr const char* kLower = "D";
inline constexpr const char* kClick = "CLICK";
inline constexpr const char* kAbsorbed = "ABSORBED";

struct UnruhOptions {
    bool detector_d2 = false;
    std::optional<Arm> obstacle;
};

// Three-pass Mach-Zehnder interferometer. Time 0 is emission, times 1..3 the
// three sections between and after the half-silvered mirrors.
struct UnruhModel {
    QuantumStructure structure;
    MirrorConvention convention;
    UnruhOptions options;

    SSet upper(TimeIndex t) const { return {t, {kUpper}}; }
    SSet lower(TimeIndex t) const { return {t, {kLower}}; }

    // Psi_U := U3 U2 U1 psi0 and Psi_D := D3 U2 U1 psi0, expressed at t3.
    ProjectedVector psi_upper() const;
    ProjectedVector psi_lower() const;

    // Slices at t1..t3; the photon modes and every auxiliary cell each form
    // a region.
    PartitionSchedule partition() const;
};

UnruhModel build_unruh(const UnruhOptions& options);
UnruhModel build_unruh(bool with_detector_d2);
UnruhModel obstacle_variant(Arm arm);

// One entry of the eight-term sign table: X3 Y2 Z1 psi0 = sign * Psi_{X}.
struct SignEntry {
    std::string chain;  // e.g. "U3 D2 U1"
    SSet first;
    SSet second;
    SSet third;
    int expected_sign = 1;
    bool upper_detector = true;
};

std::vector<SignEntry> unruh_sign_table(const UnruhModel& model);

// ||U2 (U1 + D1) psi0||^2, ||U2 U1 psi0||^2, ||U2 D1 psi0||^2 on the
// interferometer without detector.
AdditivityWitness nonadditivity_demo();

// Single beam splitter: cells A (reflected, pinhole P_A then detector D_A)
// and B (transmitted). Time 1 is the pinhole plane, time 2 the detectors.
QuantumStructure build_beamsplitter_fig1();

// Two cells with trivial evolution over two steps; every projection
// commutes so no interference is possible.
QuantumStructure build_identity_pair(double weight_a = 0.3);

}  // namespace qtyp
