import os
import yaml


class Parameters:
    """
    Global parameters module

    Parameters are used by every procedure and are defined in the parameters.yml file ONLY.
    Parameters are organized in the following groups:

    corpus: sizes, seed, image-feature dimension and noise of the synthetic toy corpus

    gradcheck: step, tolerance and number of sampled coordinates for the finite-difference check

    model:
    dimension: width of every node representation, embedding and recurrent state
    gcn_layers: number of graph convolution layers in each scene-graph encoder
    triaffine_hidden: number of output channels of the triaffine relation scorer
    decoder_attention: whether the decoder attends over node representations at each step

    system:
    cpus: Maximum threads to be used in any procedure
    logging: whether to write temp/sgpivot.log
    logging_directory: where the log file lives. Falls back to the system temp folder

    training: defaults for the staged schedule (see objectives.ScheduleConfig)

    vsh: visual scene hallucination controls
    """

    def __init__(self, file_name=None):
        """ Loads parameters from file. Defaults to parameters.yml at the root of the package"""
        path = os.path.dirname(os.path.realpath(__file__))
        self.file = file_name or os.path.join(path, "parameters.yml")
        with open(self.file, "r") as yml:
            self.parameters = yaml.load(yml, Loader=yaml.SafeLoader)

    def write_back(self):
        """Writes the parameters back to file"""
        with open(self.file, "w") as stream:
            yaml.dump(self.parameters, stream, default_flow_style=False)

    def restore_default(self):
        """Restores parameters to generic default"""
        path = os.path.dirname(os.path.realpath(__file__))
        default_file = os.path.join(path, "parameter_default.yml")
        with open(default_file, "r") as yml:
            self.parameters = yaml.load(yml, Loader=yaml.SafeLoader)
        self.write_back()
