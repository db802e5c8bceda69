try:
    # Import the command line entry point
    from cosched.cli.app import main

    if __name__ == "__main__":
        main()
except ImportError as e:
    import sys
    import traceback

    print(f"Error starting cosched: {e}\n\n{traceback.format_exc()}", file=sys.stderr)
    sys.exit(5)
