// Minimal library walkthrough: simulate the drive under a sinusoidal
// current reference, feed the identifier sample by sample, and print how
// the prediction error shrinks as the rule base fills in.

#include <cstdio>

#include "relid/identifier.hpp"
#include "relid/plant.hpp"

int main() {
  relid::MotorParams motor;  // catalogue values for the bench machine
  relid::SimOptions sim;
  sim.dt = 1e-4;
  sim.duration = 6.0;
  sim.output_stride = 10;  // identifier samples at 1 kHz

  const auto stream = relid::simulate(relid::Schedule::sinusoid(10.0, 0.5),
                                      relid::Schedule::constant(motor.load_torque), motor, sim);

  relid::IdentifierConfig cfg;
  cfg.alpha = 2.3;
  cfg.beta = 0.82;
  cfg.gamma = 0.01;
  cfg.dt = 1e-3;
  cfg.n_sets = 9;
  // Start the speed universe well below the ~127 rad/s peak: early samples
  // get fine resolution and the universe expansion follows the sweep up.
  cfg.y_init_limit = 25.0;

  relid::Identifier id(cfg);
  double window = 0.0;
  int count = 0;
  for (const relid::Sample& s : stream) {
    const relid::StepResult r = id.step(s.u, s.y);
    window += r.error * r.error;
    if (++count == 500) {  // report every half second
      std::printf("t = %5.2f s   rms prediction error %8.4f rad/s\n", s.t,
                  std::sqrt(window / count));
      window = 0.0;
      count = 0;
    }
  }

  const auto snap = id.snapshot();
  std::printf("learned relation is %zux%zu, %zu samples absorbed\n", snap.relation.rows(),
              snap.relation.cols(), snap.sample_count);
  return 0;
}
