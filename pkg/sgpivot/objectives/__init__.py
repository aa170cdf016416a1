from .losses import loss_cma, loss_rec, loss_vcb, loss_cpb, loss_vsh, total_loss, LossBundle, label_anchors
from .losses import image_regression, loss_names, CMA, REC, VCB, CPB, VSH
from .schedule import training_schedule, ScheduleConfig
from .optimizer import SGD
