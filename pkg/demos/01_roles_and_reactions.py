"""Who are the experts, who are the seekers, and do seekers react?

Generates the bundled synthetic dataset, finds experts from List memberships,
filters the List creators down to seekers and prints how often seekers
retweet, like, answer or follow their experts.
"""

from iwaa.ingest import bundled_config, generate_synthetic
from iwaa.reactions import icdf, profile
from iwaa.roles import build_pairs, filter_seekers, identify_experts

seqs, roster = generate_synthetic(bundled_config())
experts = identify_experts(roster.lists)
for topic, users in sorted(experts.items()):
    print(f"{topic}: {len(users)} experts")

creators = {l.creator_id for l in roster.lists}
seekers, dropped = filter_seekers(creators, roster, seqs)
print(f"{len(seekers)} seekers kept, {len(dropped)} dropped: {sorted(set(dropped.values()))}")

pairs = build_pairs(roster.lists, experts, seekers, roster)
print(f"{len(pairs)} (seeker, expert, list) pairs, {len(pairs.followed())} followed")

profiles = [profile(s, pairs.experts_of(s), seqs[s], roster) for s in pairs.seekers()]
effortless = icdf([p.effortless for p in profiles])
print(f"share of seekers with no effortless reaction at all: {1 - effortless(1e-12):.2f}")
for p in profiles[:5]:
    print(p.seeker_id, {k: round(v, 2) for k, v in p.averages().items()})
