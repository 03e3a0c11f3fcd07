// Stand-in external solver: reads an MPS model, solves it with the embedded
// branch and bound and writes the solution file format the adapter expects.

#include <fstream>
#include <iostream>
#include <sstream>

#include "mps_reader.hpp"
#include "nexusplan/branch_bound.hpp"
#include "nexusplan/mps.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: " << argv[0] << " model.mps solution.sol\n";
    return 2;
  }
  std::ifstream in(argv[1]);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto p = nexusplan::oracle::read_mps(ss.str());
  const auto r = nexusplan::solve_milp(p);
  std::ofstream out(argv[2]);
  out << "status " << nexusplan::to_string(r.status) << "\n";
  if (!r.optimal()) return 0;
  out << "objective " << *r.objective << "\n";
  out.precision(17);
  for (std::size_t j = 0; j < r.assignment.size(); ++j)
    if (r.assignment[j] != 0.0) out << p.variables()[j].name << " " << r.assignment[j] << "\n";
  return 0;
}
