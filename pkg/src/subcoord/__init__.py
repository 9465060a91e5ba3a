"""Online multi-agent submodular coordination.

Library layout:

- ``core``: ground sets, partition matroids, oracle interface, brute force
- ``extension``: categorical extension values, gradients, estimators
- ``polytope``: simplex projections, slot embeddings, ambient bounds
- ``dynamics``: stagewise ascent, two-step tracking, regret accounting
- ``policy``: tabular masked-softmax policies and policy-gradient training
- ``envs``: grid coverage and multi-target tracking simulators
- ``baselines``: sequential greedy, online local greedy, random
- ``synthetic``: weighted-coverage test oracles and drifting streams
- ``harness``: configs, seeded runs, CSV logs, CLI
"""

from .core import (
    PartitionMatroid,
    SetFunction,
    brute_force_opt,
    check_set_function,
    enumerate_selections,
    is_feasible,
    marginal_gain,
)
from .extension import (
    Tabulated,
    difference_reward_grad,
    extension_grad,
    extension_grad_fd,
    extension_value,
    extension_value_mc,
    second_difference,
)
from .polytope import (
    FaceSpec,
    SlotAllocator,
    diameter_and_bounds,
    embed,
    face_of,
    path_length,
    project_block,
    project_face,
    uniform_point,
)
from .dynamics import (
    RegretTrace,
    Round,
    StagewiseRun,
    SyntheticStream,
    EnvStream,
    regret_bound,
    run_online,
    stagewise_ascent,
    step_size_dynamic,
    step_size_stagewise,
    two_step_update,
)
from .policy import (
    Observation,
    TabularPolicy,
    difference_returns,
    masked_softmax,
    surrogate_gradient,
    train,
)
from .baselines import csg, online_local_greedy, random_policy, shared_reward_train

__version__ = "0.1.0"
