"""Scenario document schema (version 1)."""

SCHEMA_VERSION = 1

ANCHOR_KINDS = ('certain', 'uncertain')

SCHEMA_TEXT = """\
# Scenario document, schema_version 1 (YAML, UTF-8)
#
# Units: positions and distances in meters, powers in dBm, shadowing in dB.
# Angles are radians; a string with a 'deg' suffix (e.g. "11.25 deg") is read
# as degrees.

schema_version: 1               # required

model:                          # optional, defaults from config.yaml
  p0_dbm: 0.0                   # received power at d0 (p_TX - L0)
  gamma: 3.5                    # path-loss exponent, > 0
  d0_m: 1.0                     # reference distance, > 0
  sigma_db: 5.0                 # shadowing standard deviation, > 0

topology:                       # optional; generates anchors a1..an when 'anchors' is absent
  kind: circle                  # circle | grid | irregular | clustered
  n: 64                         # circle, irregular
  d_m: 5.0                      # circle radius
  phi1: "2.8125 deg"            # circle: phi_i = phi1 + (i - 1) 2 pi / n
  # rows, cols, spacing_m       # grid (row-major, centred on the origin)
  # bounds: [xmin, ymin, xmax, ymax], seed        # irregular
  # centers: [[x, y], ...], cluster_size, radius_m, seed   # clustered
  uncertain:                    # optional
    first: 16                   # first 16 generated anchors ...
    ids: []                     # ... and/or explicit ids
    delta_m: 3.0                # K_k = delta^2 I
    prior_count: 1

anchors:                        # explicit anchors, take precedence over topology
  - id: a1
    x_m: 5.0
    y_m: 0.0
    kind: certain               # certain | uncertain
  - id: a2
    x_m: 0.0
    y_m: 5.0
    kind: uncertain
    prior_cov: [[4.0, 1.5], [1.5, 3.0]]   # K_k in m^2, symmetric positive definite
    delta_m: 2.0                # sugar for prior_cov = delta^2 I (must agree if both given)
    prior_count: 1              # a_k >= 1

sources:
  - id: s1
    x_m: 0.0
    y_m: 0.0
    sample_count: 1             # t_j >= 1
    known_position: false

analysis:                       # optional
  confidence_k: 1.0             # ellipse scale k > 0 (P_e = 1 - exp(-k/2))
  outputs: []                   # node ids to report; empty reports every unknown node
"""
