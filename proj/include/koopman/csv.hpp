#pragma once

#include <iosfwd>
#include <string>

#include "koopman/empirical.hpp"

namespace koopman {

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

// Snapshot CSV. Header columns x1..xn, xp1..xpn and optionally y1..yp, yp1..ypp,
// one sample per line. A file without xp columns is read as a single trajectory:
// consecutive rows form the (X, X+) pairs, and y columns likewise form (Y, Y+).
// Throws ParseError naming the offending line and column.
SnapshotSet read_snapshot_csv(std::istream& in);
SnapshotSet read_snapshot_csv_file(const std::string& path);

void write_snapshot_csv(std::ostream& out, const SnapshotSet& data);

}  // namespace koopman
