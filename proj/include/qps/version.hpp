#pragma once

namespace qps {

inline constexpr const char* kVersion = "0.1.0";

/// Version tag written into every run report so artifacts can be traced
/// back to the binary that produced them.
inline constexpr int kReportSchemaVersion = 1;

}  // namespace qps
