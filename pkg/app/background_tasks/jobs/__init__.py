from .runner import JOBS, run_job
from .simulate import simulate_job
from .lemmas import lemmas_job
from .compat import compat_job
from .contraction import contraction_job
from .mms import mms_job
