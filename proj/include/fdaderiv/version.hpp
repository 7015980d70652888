#pragma once

namespace fdaderiv {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace fdaderiv
