"""
Voxel limit and live parameter changes
======================================

With a voxel limit the map keeps the most recently updated occupied voxels
and forgets the rest. Parameters can change between cycles without
rebuilding the map.
"""

from vxmap import MapConfig, ShareFrame, VoxelMapper

mapper = VoxelMapper(MapConfig(n_lim=3))
for seq, keys in enumerate([[(0, 0, 0)], [(10, 0, 0)], [(20, 0, 0)], [(0, 0, 0)], [(30, 0, 0)]], 1):
    mapper.update(None, [ShareFrame(1, seq, 0, 0.1, keys)])
    print(f"cycle {seq}: history {[r.key for r in mapper.state.b_his]}, evicted {mapper.state.evicted}")

###############################################################################
# Shrink the inflation radius to zero, then widen it. Every table is rebuilt
# at the start of the following cycle.

for r_obs in (0.0, 0.3):
    mapper.update_params(r_obs=r_obs)
    mapper.update()
    print(f"r_obs {r_obs}: {mapper.n_inflated()} inflated voxels for {mapper.n_occ()} occupied")
