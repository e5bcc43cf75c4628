"""
Sharing map deltas over a lossy link
====================================

A sender maps a hall and exports only the voxels that turned occupied each
cycle. The frames go through a fixed-size outbox to a receiver. We compare a
clean link, a two second outage the outbox can bridge, and the same outage
with an outbox that is too small.
"""

from vxmap import MapConfig
from vxmap.cli import run_gen, run_share_sim
from vxmap.sim import SensorSpec

spec = SensorSpec(rays_per_frame=2000, max_range=30)
scene, traj, frames = run_gen(11, (20.0, 12.0, 5.0), 0.05, spec, speed=0.5, hover=20,
                              n_frames=80, waypoints=[(3.0, 6.0, 1.5), (17.0, 6.0, 1.5)],
                              enclosed=True, corridor=1.2)
print(f"{len(frames)} frames, {sum(len(f) for f in frames) / len(frames):.0f} points each")

###############################################################################
# Clean link: every delta arrives once.

rep, sender, receiver = run_share_sim(frames, MapConfig())
print(f"raw {rep['raw_bytes']} B, encoded {rep['encoded_bytes']} B, "
      f"reduction {rep['encoded_reduction_pct']:.1f}%")
print(f"receiver holds {rep['retention_pct']:.2f}% of the sender's occupied voxels")

###############################################################################
# A twenty-frame outage. With 50 slots the outbox still holds every frame when
# the link returns; with 5 slots the oldest ones were overwritten.

for cap in (50, 5):
    rep, _, _ = run_share_sim(frames, MapConfig(ring_capacity=cap), outages=[(40, 20)])
    print(f"ring {cap:2d}: retention {rep['retention_pct']:.2f}%, frames lost {rep['frames_lost']}, "
          f"gaps {rep['seq_gaps']}, bytes sent {rep['transmitted_bytes']}")
