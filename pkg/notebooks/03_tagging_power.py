# %% [markdown]
# # How many pulses does a quiet unit need?
#
# Units that fire once every couple of minutes rarely spike during a 50 ms
# pulse.  With 3 expected baseline spikes over all pulses as the design
# target, a 0.01 spk/s unit needs 6000 pulses.  Here we check how often the
# Poisson test actually flags such a unit when light quadruples its rate.

# %%
import numpy as np

from dualbeam.protocol import square_train
from dualbeam.spikes import min_pulse_count, poisson_tag, synth_unit
from scipy import stats

n = min_pulse_count(0.01, 0.05)
print("pulses needed:", n)

# %%
def detection(baseline, gain=4.0, reps=300, n_pulses=n):
    pulses = square_train(1.0, 0.05, 29.0, n_pulses)
    epoch = (0.0, float(n_pulses))
    hits = [poisson_tag(synth_unit(s, baseline, pulses, gain, epoch), pulses, epoch).klass == "activated"
            for s in range(reps)]
    return np.mean(hits)


for rate in (0.01, 0.015, 0.02, 0.05):
    print(f"baseline {rate:5.3f} spk/s  detection {detection(rate):.2f}")

# %% [markdown]
# At exactly 0.01 spk/s the test needs at least 9 in-pulse spikes to reach
# p < 0.01 against an expectation of 3, and a gain of 4 only gives 12 on
# average, so detection tops out near P(Poisson(12) >= 9).

# %%
print("analytic ceiling:", stats.poisson.sf(8, 12))
