#pragma once

#include <string>
#include <vector>

#include "yamabe/continuation.hpp"

namespace yamabe {

// Shortest round-trip decimal representation.
std::string format_double(double x);

// CSV contract: '.' decimal, ',' separator, header row, LF line endings.
std::string trace_to_csv(const ContinuationTrace& trace);
std::string field_to_csv(const OperatorAssembly& a, const DiscreteField& v, double alpha);

std::string extremal_to_json(const Extremal& e);
std::string verdict_to_json(const Verdict& v);

void write_file(const std::string& path, const std::string& content);

}  // namespace yamabe
