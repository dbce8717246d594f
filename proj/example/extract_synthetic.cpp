// Build a small synthetic scene, run every extractor once and print the
// matched SAM of each result against the true endmembers.

#include <iomanip>
#include <iostream>

#include "unmix/unmix.hpp"

int main() {
  using namespace unmix;
  SceneSpec spec;
  spec.bands = 100;
  spec.side = 48;
  spec.snr_db = 40.0;
  const Scene scene = make_scene(spec);
  ReductionCache cache(scene.cube);

  for (const auto &name : kAlgorithmNames) {
    ExtractorSpec es = make_extractor_spec(name, spec.endmember_count, 7);
    if (es.ga)
      es.ga->generations = 300;
    const EndmemberSet found = extract_detailed(cache, es).endmembers;
    std::cout << std::setw(14) << name << "  rms SAM " << std::setprecision(4)
              << rms(match_endmembers(found, scene.endmembers, Metric::SAM)) << "  volume "
              << extraction_volume(cache, found) << '\n';
  }
}
