matches = df['title'].apply(lambda x: 'Star' in x)
