int main()
{
int count;
int n;
int i;
int j;
int max;
int a[20];
for (i = 0; i < n; i++)
{
  for (j = i; j < n; j++)
  {
    if (a[i] < a[j])
    {
      count = count + 1;
    }
  }
  if (count > max)
  {
    max = count;
  }
}
printf("%d", max);
return 0;
}
