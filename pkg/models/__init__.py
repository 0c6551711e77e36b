# Make models directory a proper package 