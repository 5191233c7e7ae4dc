#pragma once

// Procedural stand-ins for natural video and natural-image noise pools. Used
// for fixtures, CI and desk-scale experiments when no real footage is around.

#include "svi/data/synth.hpp"

#include <filesystem>

namespace svi::data {

/// Smooth colour field with a few soft blobs, panning at a constant
/// sub-pixel velocity drawn from `seed`.
SourceClip make_procedural_clip(const std::string& clip_id, std::int64_t length, std::int64_t height,
                                std::int64_t width, std::uint64_t seed);

/// Textured patches (oriented gratings with coloured blotches), disjoint from
/// any procedural clip by construction of their ids ("noise-<k>").
NoiseBank make_procedural_noise_bank(std::size_t count, std::int64_t height, std::int64_t width,
                                     std::uint64_t seed);

/// Reads a clip from a directory of PNG frames sorted by file name.
SourceClip load_source_clip(const std::filesystem::path& dir);

/// Reads every PNG in `dir` as a noise patch; ids are "<dir name>/<file stem>".
NoiseBank load_noise_bank(const std::filesystem::path& dir);

}  // namespace svi::data
