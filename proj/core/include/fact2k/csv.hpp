#ifndef FACT2K_CSV_HPP
#define FACT2K_CSV_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "fact2k/assignment.hpp"
#include "fact2k/population.hpp"

namespace fact2k {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Potential-outcome file: header "unit,y1,...,y{2^K}", one row per unit,
// treatment columns in canonical z order. Comma separated, '.' decimal
// separator, no locale handling; malformed rows are reported with their
// 1-based line number.
PotentialOutcomeTable read_potential_outcomes(std::istream& in,
                                              const std::string& source = "<stream>");
PotentialOutcomeTable read_potential_outcomes_file(const std::string& path);
void write_potential_outcomes(std::ostream& out, const PotentialOutcomeTable& table);

// Observed-data file: header "unit,f1,...,fK,y" with factor columns in
// {-1,1}; the factor levels identify the treatment combination.
ObservedData read_observed(std::istream& in, const std::string& source = "<stream>");
ObservedData read_observed_file(const std::string& path);
void write_observed(std::ostream& out, const ObservedData& obs);

// Assignment file: header "unit,treatment", both 1-based.
void write_assignment(std::ostream& out, const Assignment& a);

}  // namespace fact2k

#endif  // FACT2K_CSV_HPP
