#pragma once

// JSON documents for specs, codebooks, labellings, codes and MC caches.
// Doubles are written in shortest round-trip form, so every document reads
// back bit-identically.

#include <json.hpp>

#include "mlpcm/bounds.hpp"
#include "mlpcm/information.hpp"
#include "mlpcm/labelling.hpp"
#include "mlpcm/multilevel.hpp"
#include "mlpcm/stbc.hpp"

namespace mlpcm {

using Json = nlohmann::json;

Json to_json(cplx z);
cplx complex_from_json(const Json& j);

Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const StbcSpec& spec);
StbcSpec spec_from_json(const Json& j);

Json to_json(const Codebook& cb);
Codebook codebook_from_json(const Json& j);

Json to_json(const SetPartitionMap& spm);
SetPartitionMap spm_from_json(const Json& j);

Json to_json(const MlpcmCode& code);
MlpcmCode code_from_json(const Json& j);

Json to_json(const BitChannelRanking& rank);
BitChannelRanking ranking_from_json(const Json& j);

Json to_json(const MiSamples& s);
MiSamples mi_samples_from_json(const Json& j);

Json to_json(const OmegaMoments& m);
OmegaMoments omega_moments_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace mlpcm
