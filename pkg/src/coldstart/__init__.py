"""Cold-start anomaly detection over embedding vectors.

Score queries against class descriptors before any data exists, adapt the
class centers to a short contaminated observation stream, and evaluate
detectors over stream time with per-step AUROC curves and prefix-averaged
summaries.
"""

from .data import (Dataset, DatasetHeader, LabeledItem, ObservationStream,
                   StreamSpec, build_stream, load_dataset, write_dataset)
from .detectors import (AdaptationMethod, AdaptedModel, ClassDescriptor,
                        TauPolicy, adapt, assign, coldfusion_score, dn2_score,
                        zs_score)
from .errors import ConfigError, DataError
from .metrics import (Auc2Summary, AucCurve, ScoredExample, auc_squared,
                      auroc, auroc_scores, summarize)
from .vectors import (COSINE, L2, coordinate_median, distance, nearest_index,
                      percentile)

__version__ = "0.1.0"
