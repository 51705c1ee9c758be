"""navsim: a headless, deterministic multimodal indoor-navigation simulator.

Subsystems: procedural 2.5D houses (scene), occupancy-grid pathfinding (nav),
cylinder-agent dynamics (physics), raycast sensor synthesis (sensors),
episodic goal tasks (task), a WebSocket session server (server), and a
benchmark harness with scripted baselines (bench).
"""

from .goals import (
    DEFAULT_SUCCESS_RADIUS,
    GoalRegion,
    GoalSpec,
    ObjectGoal,
    PointGoal,
    RoomGoal,
)
from .nav import (
    DistanceField,
    OccupancyGrid,
    build_grid,
    distance_field,
    is_navigable,
    sample_start_goal,
)
from .physics import (
    AgentConfig,
    AgentState,
    ContactReading,
    ControlCommand,
    build_collision_world,
    contact_reading,
    step,
)
from .scene import (
    CATEGORIES,
    ROOM_CLASSES,
    House,
    Material,
    Opening,
    Room,
    SceneObject,
    VariationSpec,
    Wall,
    apply_variation,
    generate_house,
    load_house,
    loads_house,
    save_house,
    validate_house,
)
from .sensors import (
    DEFAULT_SENSORS,
    CameraFrame,
    Measurements,
    Observation,
    SensorSpec,
    build_render_world,
    camera_pose,
    measurements,
    observe,
    render,
)
from .task import (
    EpisodeConfig,
    EpisodeResult,
    Simulation,
    StepResult,
    aggregate,
)

__version__ = "0.1.0"
