//! Fixtures shared by the benchmarks in `benches/`.

use viewcurate::synth::{default_intrinsics, generate_scene, SynthScene, SynthSpec};

/// The abrupt-turn survey used for method ranking: 128 cameras, 90k points.
pub fn survey_scene() -> SynthScene {
    let spec = SynthSpec {
        abrupt_turns: true,
        ..SynthSpec::default()
    };
    generate_scene(&spec, &default_intrinsics()).expect("default spec is valid")
}
