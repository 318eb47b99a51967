"""
Console logging for the unshuffle package and its command line tool.
"""
import sys
import logging

ROOT_NAME = 'unshuffle'


class Logger(object):
    """
    Logger class with output on console only. All package loggers are
    children of the 'unshuffle' logger, which owns the single console
    handler and the verbosity level.
    """
    def __init__(self, logger_name=ROOT_NAME):
        """
        Initialize named logger
        """
        self._root = logging.getLogger(ROOT_NAME)
        self._log = logging.getLogger(logger_name)
        self.setup_logger()
        self._log.set_verbose = self.set_verbose

    def __call__(self):
        """
        Calling this object will return configured logging.Logger object with
        additional set_verbose() method.
        """
        return self._log

    def set_verbose(self, verbose_level, quiet_level):
        """
        Change verbosity level of the whole package. Default level is
        warning.
        """
        self._root.setLevel(logging.WARNING)

        if quiet_level:
            self._root.setLevel(logging.ERROR)
            if quiet_level > 1:
                self._root.setLevel(logging.CRITICAL)

        if verbose_level:
            self._root.setLevel(logging.INFO)
            if verbose_level > 1:
                self._root.setLevel(logging.DEBUG)

    def setup_logger(self):
        """
        Attach the console handler to the package logger, once.
        """
        if self._root.handlers:
            # need only one handler
            return

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.set_name("console")
        console_formatter = logging.Formatter("%(levelname)s: %(message)s")
        console_handler.setFormatter(console_formatter)
        self._root.addHandler(console_handler)
        self._root.setLevel(logging.WARNING)


def get_logger(name):
    """
    Return configured logger for the module name provided
    """
    return Logger(name)()
