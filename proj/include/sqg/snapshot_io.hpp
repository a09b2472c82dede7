#pragma once

// Binary snapshot persistence.
//
// Snapshot file: magic bytes "SQGLAB1\n", one ASCII header line
//   N=<int> L=<17g> t=<17g> alpha=<17g> kappa=<17g>\n
// then N^2 little-endian IEEE doubles, row-major. Round trips are bit exact.
//
// Extension dump: same layout with the extra header tokens
//   J=<int> zmin=<17g> rho=<17g>
// and J+1 layers (the boundary trace first), each N^2 doubles.

#include <string>

#include "sqg/extension.hpp"
#include "sqg/field.hpp"

namespace sqg {

struct SnapshotFile {
  PhysicalField field;
  double time = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
};

void snapshot_write(const std::string& path, const PhysicalField& field,
                    double time, double alpha, double kappa);

/// Throws std::runtime_error on magic/header mismatch, truncation, or a
/// payload length that disagrees with the declared N.
SnapshotFile snapshot_read(const std::string& path);

struct ExtensionDump {
  ExtensionField ext;  // method/extrapolation settings take defaults on read
  double time = 0.0;
  double kappa = 0.0;
};

void extension_write(const std::string& path, const ExtensionField& ext,
                     double time, double kappa);

ExtensionDump extension_read(const std::string& path);

}  // namespace sqg
