#pragma once

namespace offroad {

/// Resident-set high-water mark of this process in bytes (0 if unavailable).
long peak_rss_bytes();
/// Current resident set size in bytes (0 if unavailable).
long current_rss_bytes();
/// Resets the high-water mark to the current RSS. Returns false where unsupported.
bool reset_peak_rss();

}  // namespace offroad
