"""How long does an expert's content sit visibly in a seeker's wall?

One seeker follows an expert and a chatty friend. Exposure decays as the
friend's posts push the expert's post down the wall; presence comes from
when the seeker posts. Prints the lower and upper bounds per day and checks
one day against numerical quadrature.
"""

from datetime import datetime, timedelta, timezone

from iwaa.core import ActivityEvent, PostKind
from iwaa.quadrature import reference_bounds
from iwaa.visibility import ExposureParams, PresenceParams, Wall, day_windows, visibility_bounds

t0 = datetime(2021, 5, 1, tzinfo=timezone.utc)
events = []
for h in range(0, 72, 6):  # expert posts every 6 hours
    events.append(ActivityEvent(f"e{h}", "expert", PostKind.TWEET, t0 + timedelta(hours=h)))
for m in range(0, 72 * 60, 20):  # friend posts every 20 minutes
    events.append(ActivityEvent(f"f{m}", "friend", PostKind.TWEET, t0 + timedelta(minutes=m, seconds=30)))
wall = Wall("seeker", tuple(sorted(events, key=lambda e: e.sort_key)))

# the seeker is active twice a day, a few posts per session
posts = [
    ActivityEvent(f"s{d}{i}", "seeker", PostKind.TWEET, t0 + timedelta(days=d, hours=h, minutes=3 * i))
    for d in range(3)
    for h in (8, 20)
    for i in range(5)
]

for ep in (ExposureParams(30, 1), ExposureParams(100, 2)):
    print(f"k={ep.k} m={ep.m}")
    for d, t1, t2 in reversed(day_windows(t0 + timedelta(days=3), days=3)):
        lo, up = visibility_bounds("expert", wall, posts, (t1, t2), ep)
        print(f"  day {d}: lower {lo:8.1f} s   upper {up:8.1f} s")

window = (t0 + timedelta(days=1), t0 + timedelta(days=2))
exact = visibility_bounds("expert", wall, posts, window)
numeric = reference_bounds("expert", wall, posts, window, ExposureParams(), PresenceParams())
print(f"analytic {exact[0]:.6f}/{exact[1]:.6f}  quadrature {numeric[0]:.6f}/{numeric[1]:.6f}")
