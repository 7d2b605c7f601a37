"""voxmeet: a simulated multi-party volumetric conferencing pipeline.

Subpackages follow the pipeline stages: capture (synthetic RGB-D to point
clouds), codec (octree point-cloud compression), wire (binary framing),
orchestrator (session and relay management), client (simulated
participant), harness (scenario runner, network model, metrics, CLI).
"""

__version__ = "0.1.0"
