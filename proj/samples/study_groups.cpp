// Balances a roster into groups and prints the pair comparison table.
//
//   study_groups roster.csv pairs.csv [k]

#include <fstream>
#include <iostream>
#include <string>

#include "coriolis/study.hpp"

int main(int argc, char** argv) {
  using namespace coriolis;
  if (argc < 3) {
    std::cerr << "usage: study_groups roster.csv pairs.csv [k]\n";
    return 2;
  }
  try {
    std::ifstream roster_in(argv[1]), pairs_in(argv[2]);
    if (!roster_in || !pairs_in) throw Error(ErrorKind::export_io, "cannot open input files");
    const auto roster = study::parse_roster(roster_in);
    const auto pairs = study::parse_pairs(pairs_in);
    const int k = argc > 3 ? std::stoi(argv[3]) : 4;

    const study::GroupAssignment groups = study::balance_groups(roster, k);
    std::cout << "search: " << to_string(groups.method) << ", J = " << groups.objective << "\n\n";
    std::cout << study::to_text(study::report(groups, pairs));
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
