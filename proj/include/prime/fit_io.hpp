#pragma once

#include <iosfwd>
#include <string>

#include "prime/keyvalue.hpp"
#include "prime/prime_fit.hpp"

namespace prime {

/// First line of every fit file.
inline constexpr const char* kFitMagic = "PRIMEFIT 1";

/// Text fit file: the magic line followed by `key = value` records. Doubles
/// use shortest round-trip formatting, so reading a written fit restores
/// every field bit-for-bit. `provenance` entries are stored as `config.<key>`.
void write_fit(const PrimeFit& fit, std::ostream& out, const KeyValueFile& provenance = {});
PrimeFit read_fit(std::istream& in);
PrimeFit read_fit_file(const std::string& path);

std::string format_bandwidth(const BandwidthRule& rule);
/// "silverman", "fixed:h" or "fixed:h1,h2,...".
BandwidthRule parse_bandwidth(const std::string& text);

std::string format_projection(const ProjectionConfig& projection);
/// "none" or "B:dist" with dist in {normal, uniform}; the seed is separate.
ProjectionConfig parse_projection(const std::string& text);

std::string format_placement(KnotPlacement placement);
KnotPlacement parse_placement(const std::string& text);

}  // namespace prime
