#pragma once

#include <filesystem>
#include <vector>

#include "degrade.hpp"
#include "phantom.hpp"

namespace fusqa {

/// Writes one image PGM, one mask PGM and a manifest.json describing every
/// sample. Returns the manifest path. Round-trips bit-exactly with
/// read_dataset.
std::filesystem::path write_dataset(const std::vector<PhantomSample>& samples,
                                    const std::filesystem::path& dir);

std::vector<PhantomSample> read_dataset(const std::filesystem::path& dir);

/// Degraded-sample variant of the same format; manifest entries additionally
/// carry {quality, provenance, source_id}.
std::filesystem::path write_samples(const std::vector<Sample>& samples,
                                    const std::filesystem::path& dir);

/// Reads a dataset directory as training samples. Plain phantom manifests
/// load too: entries without a quality field come back as good originals.
std::vector<Sample> read_samples(const std::filesystem::path& dir);

}  // namespace fusqa
