# %% [markdown]
# # Why the Nepal gain is tiny
#
# Gain is replies over relevant messages. The number of replies is bounded by
# how many questions the bots can send, so an event with thousands of relevant
# posts barely moves. Compare the five bundled events, then grow the bot fleet
# for Nepal and watch the gain follow the capacity.

# %%
import dataclasses

from hermes.config import bundled_scenario
from hermes.pipeline import run_scenario

for name in ("san_ramon", "lila", "nepal", "kokopo", "irving"):
    r = run_scenario(bundled_scenario(name)).report
    c = r.counts
    print(f"{name:10s} relevant={c['relevant']:6d} sent={c['questions_sent']:4d} "
          f"replies={c['replies']:4d} gain={r.message_gain_pct}")

# %%
nepal = bundled_scenario("nepal")
for count in (2, 4, 8, 16):
    cfg = dataclasses.replace(nepal, bots=dataclasses.replace(nepal.bots, count=count))
    r = run_scenario(cfg).report
    print(f"bots={count:2d} sent={r.counts['questions_sent']:4d} replies={r.counts['replies']:4d} "
          f"gain={r.message_gain * 100:.1f}%")
