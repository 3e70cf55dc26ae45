# %% [markdown]
# # Do asked users give better location data?
#
# Replies to a "where are you" question carry more place mentions than the
# spontaneous posts, and at finer granularity. Check this on the enrichment
# scenario, then repeat over 30 seeds to see how stable the Welch test is.

# %%
import dataclasses

import numpy as np

from hermes import data_path
from hermes.config import bundled_scenario
from hermes.geoparse import geoparse, load_gazetteer
from hermes.pipeline import run_scenario

base = bundled_scenario("enrichment")
r = run_scenario(base).report
for k in ("relevant", "reply2geo"):
    print(k, "density %.2f variety %.2f" % (r.place_density[k], r.place_variety[k]))
print("density test:", r.significance["density"])
print("granularity of reply places:", r.granularity_distribution["reply2geo"])

# %%
ratios, pvals = [], []
for k in range(30):
    rk = run_scenario(dataclasses.replace(base, seed=base.seed + 1000 + k)).report
    ratios.append(rk.place_density["reply2geo"] / rk.place_density["relevant"])
    pvals.append(rk.significance["density"].p)
ratios = np.array(ratios)
print("density ratio %.2f +- %.2f, significant in %d/30" % (ratios.mean(), ratios.std(), sum(p < 0.05 for p in pvals)))

# %% [markdown]
# The geoparser behind those numbers. Ambiguous names resolve toward the
# epicenter when one is given, otherwise by population.

# %%
gaz = load_gazetteer(data_path("gazetteer.tsv"))
text = "Felt it in Springfield and downtown Kathmandu"
for ctx in (None, (37.2, -93.3), (39.8, -89.6)):
    tags = geoparse(text, gaz, ctx)
    print(ctx, [(t.surface, t.place_id, round(t.lat, 2), round(t.lon, 2)) for t in tags])
