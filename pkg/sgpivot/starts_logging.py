import os
import sys
import tempfile
import logging
from .parameters import Parameters

sys.dont_write_bytecode = True


def StartsLogging():
    # CREATE THE LOGGER
    system = Parameters().parameters["system"]
    temp_folder = system["logging_directory"]
    do_log = system["logging"]
    if not os.path.isdir(temp_folder):
        temp_folder = tempfile.gettempdir()

    logger = logging.getLogger("sgpivot")
    logger.setLevel(logging.DEBUG)
    formatter = logging.Formatter("%(asctime)s;%(name)s;%(levelname)s ; %(message)s")

    if not len(logger.handlers):
        if do_log:
            ch = logging.FileHandler(os.path.join(temp_folder, "sgpivot.log"))
            ch.setFormatter(formatter)
            ch.setLevel(logging.DEBUG)
        else:
            ch = logging.NullHandler()
        logger.addHandler(ch)
    return logger


logger = StartsLogging()
