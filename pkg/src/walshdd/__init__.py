"""Walsh dynamical decoupling: digital pulse sequences from Walsh functions.

Construction and analysis of decoupling sequences whose control propagator
is a Walsh function: exact sequence algebra, noise filter functions,
coherence integrals under parametric noise spectra, Monte Carlo and exact
small-bath simulation, detuned-gate error filtering, and search over the
digital sequence space.
"""

from .walsh import (
    DyadicFunction,
    WalshIndex,
    hamming_weight,
    inverse_walsh_transform,
    moment,
    modulated_moment,
    rademacher,
    sequency,
    switch_points,
    walsh,
    walsh_transform,
)
from .sequences import (
    DigitalSchedule,
    DigitizeResult,
    PulsePattern,
    compile_schedule,
    concatenate,
    digitize,
    free_evolution,
    named_index,
    repeat,
    udd_pattern,
    wdd_pattern,
    wdd_record,
)
from .filters import (
    FilterProfile,
    bandwidth,
    filter_function,
    filter_profile,
    propagator_transform,
    rolloff_exponent,
    wdd_filter,
    wdd_filter_log,
)
from .noise import (
    BracketError,
    CoherenceResult,
    InfraredDivergenceError,
    NoiseSpectrum,
    attenuation,
    psd_eval,
    t2_time,
)
from .simulate import (
    BathFidelityResult,
    BathModel,
    MonteCarloResult,
    NoiseTrajectory,
    ThreeAxisBath,
    bath_fidelity,
    mc_coherence,
    random_bath,
    synth_noise,
    three_axis_bath_fidelity,
)
from .dcg import (
    GateErrorConfig,
    displacement,
    expected_displacement_sq,
    notch_order,
)
from .gwdd import AxisSchedule, first_order_residual, gwdd_schedule
from .search import (
    SearchReport,
    best_wdd,
    brute_force_digital,
    enumerate_wdd,
)

__version__ = "0.1.0"
