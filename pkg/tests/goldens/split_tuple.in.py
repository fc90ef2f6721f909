print(len(df))
a, b = df['C'].str.split('(', 1, expand=True)
