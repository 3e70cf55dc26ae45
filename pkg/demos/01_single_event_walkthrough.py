# %% [markdown]
# # One earthquake, end to end
#
# Run the bundled San Ramon scenario and look at what each stage produced:
# the opportunistic stream, the relevance filter, the questions the bots sent
# and the replies that came back.

# %%
from collections import Counter

import numpy as np

from hermes.config import bundled_scenario
from hermes.pipeline import check_invariants, run_scenario

cfg = bundled_scenario("san_ramon")
res = run_scenario(cfg)
check_invariants(res)
print(cfg.event.event_id, "M", cfg.event.magnitude, "seed", cfg.seed)

# %% [markdown]
# Opportunistic sensing: most collected posts are chatter that happens to use
# an earthquake keyword. The relevance classifier keeps roughly a third.

# %%
print("stream   ", len(res.stream))
print("collected", len(res.collected))
print("relevant ", len(res.relevant))

# %% [markdown]
# Participatory sensing. The bots work under a sliding-window rate limit, so the
# sends are spread out in time.

# %%
status = Counter(e["status"] for e in res.dispatch_log)
print(dict(status))
sent = sorted(e["sent_time"] for e in res.dispatch_log if e["status"] == "sent")
minutes = (np.array(sent) - sent[0]) / 60000.0
print("sending lasted %.1f min" % minutes[-1])

# %%
rep = res.report
print("replies", rep.counts["replies"], "gain", rep.message_gain_pct)
lat = np.array([r.delta_t for r in res.replies])
print("reply latency: mean %.1f  median %.1f  p90 %.1f min" % (lat.mean(), np.median(lat), np.percentile(lat, 90)))

# %% [markdown]
# The full report, as written to report.json by `hermes run`.

# %%
print(rep.to_json()[:1200])
