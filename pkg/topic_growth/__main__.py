import os
import sys


def main(argv=None):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "topic_growth.settings")

    from django.core.management import execute_from_command_line

    argv = sys.argv[1:] if argv is None else argv
    execute_from_command_line(["topic-growth", "topicgrowth", *argv])


if __name__ == "__main__":
    main()
